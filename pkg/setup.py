"""Build the optional compiled kernel extension.

The package works without it: engagedyn._kernels falls back to the numpy
implementations when the extension is missing or ENGAGEDYN_BACKEND=pure.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "engagedyn._kernels._native",
        ["src/engagedyn/_kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
