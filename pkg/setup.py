"""Build script: compiles the optional query-kernel extension when Cython is available.

Without Cython (or a C compiler) the package still installs and runs on the
pure-numpy kernel backend; `trendcast.kernels.backend_name()` reports which
one is active.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "trendcast._ckernels",
                ["src/trendcast/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
