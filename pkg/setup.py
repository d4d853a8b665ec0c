"""Build shim for the optional compiled kernels.

The package works without the extension (numpy fallbacks are selected at
import time); building it just makes the decoder and sampler hot loops
faster.  `pip install -e . --no-build-isolation` compiles it when Cython
and a C compiler are present.
"""

import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    if not os.path.exists("src/gbmem/_kernels/_core.pyx"):
        cythonize = None
    if cythonize is None:
        ext_modules = []
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "gbmem._kernels._core",
                    ["src/gbmem/_kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
