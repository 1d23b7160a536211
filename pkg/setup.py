import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# Compiled kernels are optional: the package falls back to numpy
# implementations when the extension is missing or fails to build.
ext_modules = []
if cythonize is not None and not os.environ.get("AVSAMPLE_SKIP_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "avsample._kernels",
                ["src/avsample/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-fopenmp"],
                extra_link_args=["-fopenmp"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
