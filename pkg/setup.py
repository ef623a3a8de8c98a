import os

import numpy as np
from setuptools import Extension, setup

# PRIVGRAPH_NO_EXT=1 skips the compiled kernels; the package then runs on the
# NumPy fallback.
ext_modules = []
if not os.environ.get("PRIVGRAPH_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "privgraph._ckernels",
                    ["src/privgraph/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
