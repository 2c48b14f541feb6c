import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build the pure-Python package only
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("HWAVES_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "hwaves._ckernels",
                ["src/hwaves/_ckernels.pyx"],
                include_dirs=[np.get_include(), "src/hwaves"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
