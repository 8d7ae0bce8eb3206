"""Build hook: compile the optional RK4 kernel, fall back to pure numpy.

The package works without the extension; dimer_nm.kernels selects the
fastest backend at import time.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "dimer_nm.kernels._speedup",
                ["src/dimer_nm/kernels/_speedup.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    sys.stderr.write(f"dimer-nm: building without compiled kernel ({exc})\n")

setup(ext_modules=ext_modules)
