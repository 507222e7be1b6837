"""Build script for the compiled simulation kernels.

The extension links against numpy's static random-distribution library so the
compiled kernels draw from the exact same PCG64/ziggurat sequence as the pure
Python fallback.  If Cython or a C compiler is unavailable the package still
installs; `gbmflow._backend` then selects the pure-Python kernels at import.
"""

import os
from os.path import join

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    np = None
    cythonize = None


def extensions():
    if cythonize is None or os.environ.get("GBMFLOW_SKIP_EXT"):
        return []
    ext = Extension(
        "gbmflow._kernels",
        ["src/gbmflow/_kernels.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[join(np.get_include(), "..", "..", "random", "lib")],
        libraries=["npyrandom"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
