import os

from setuptools import setup

ext_modules = []
if not os.environ.get("BITMASKED_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        import numpy as np
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "bitmasked._ckernels",
                    ["src/bitmasked/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
