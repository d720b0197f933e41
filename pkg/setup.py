"""Build script for the compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes the hot loops faster.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "flatpoly._kernels._native",
                ["src/flatpoly/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps float results comparable with the
                # NumPy fallback (no fused multiply-add differences).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
