"""Build the optional compiled kernels.

The package works without them: ``concept_forge.kernels`` falls back to a
numpy implementation when the extension cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CONCEPT_FORGE_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "concept_forge._ckernels",
                    ["src/concept_forge/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
