import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-python kernel fallback is selected at import time, so a build
    # without Cython still produces a working package.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "hzsl.kernels._speedups",
                ["src/hzsl/kernels/_speedups.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
