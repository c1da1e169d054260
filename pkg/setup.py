"""Build script for the optional compiled kernel core.

The extension accelerates the selective-scan recurrence and exact
nearest-neighbor queries. If Cython or a C compiler is unavailable the
package installs anyway and falls back to the numpy kernels at import.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "mpcc.kernels._native",
                ["src/mpcc/kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError as exc:
    sys.stderr.write(f"mpcc: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
