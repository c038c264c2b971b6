"""Build script: compiles the elimination kernel when Cython and a C
compiler are available; the package falls back to the NumPy kernel at
import time if the extension is missing."""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "quadcal._reduction",
                ["src/quadcal/_reduction.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
