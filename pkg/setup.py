"""Build script for the optional compiled stencil kernels.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the compiled core is ~5-10x faster on the
eigensolver hot loop. Build failures therefore only warn.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "mmcavity._kernels._stencils",
                ["src/mmcavity/_kernels/_stencils.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    warnings.warn(f"building without compiled kernels ({exc}); numpy fallback will be used")

setup(ext_modules=ext_modules)
