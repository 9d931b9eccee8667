import os
import sys

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

openmp = [] if sys.platform == "darwin" or os.environ.get("CMCLAB_NO_OPENMP") else ["-fopenmp"]

ext_module = Extension(
    "cmclab.kernels._core",
    ["src/cmclab/kernels/_core.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3"] + openmp,
    extra_link_args=openmp,
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(
    ext_modules=cythonize(ext_module, compiler_directives={"language_level": "3"}),
)
