"""Benchmark the compiled kernels against the pure-Python fallback.

Both backends consume identical RNG streams, so the outputs agree bit for
bit; only throughput differs.  Run:

    python3 benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from gbmflow._backend import available_backends
from gbmflow.core import ModelParams
from gbmflow.firstpassage import FirstPassageSetup
from gbmflow.mc import (
    gillespie_population,
    sample_fpt_open,
    sample_fpt_reset,
    simulate_ensemble,
)
from gbmflow.rngstreams import RngSpec

PAR = ModelParams(mu=0.1, sigma=math.sqrt(0.02), x0=2.0, lambda_r=20.0,
                  lambda_m=0.5)
FP = FirstPassageSetup(
    params=ModelParams(mu=0.05, sigma=math.sqrt(0.02), x0=2.0), x_target=3.0
)

CASES = {
    "ensemble (pop~40, t=40, dt=2e-3)": lambda b: simulate_ensemble(
        PAR, 40.0, 0.002, RngSpec(1, 0), snapshot_times=[40.0], backend=b
    ),
    "gillespie (3000 runs, t=2)": lambda b: [
        gillespie_population(
            ModelParams(mu=0.1, sigma=0.2, x0=2.0, lambda_r=100.0,
                        lambda_m=0.5),
            2.0, RngSpec(2, i), np.linspace(0, 2, 11), backend=b,
        )
        for i in range(3000)
    ],
    "fpt open (2000 paths, dt=4e-3)": lambda b: sample_fpt_open(
        FP, 5.0, 0.5, 0.004, 2000, RngSpec(3, 0), backend=b
    ),
    "fpt reset (2000 paths, dt=4e-3)": lambda b: sample_fpt_reset(
        FP, 0.5, 0.004, 2000, RngSpec(4, 0), backend=b
    ),
}


def main():
    backends = available_backends()
    print(f"backends: {', '.join(backends)}\n")
    width = max(len(k) for k in CASES)
    header = f"{'case':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, fn in CASES.items():
        times = {}
        for b in backends:
            t0 = time.perf_counter()
            fn(b)
            times[b] = time.perf_counter() - t0
        row = f"{name:<{width}}  " + "".join(
            f"{times[b]:>11.3f}s" for b in backends
        )
        if len(backends) == 2:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
