"""Build script: compiles the optional Cython hot-kernel extension.

The package is fully functional without the extension (numpy fallback is
selected at import), so any failure here degrades to a pure build instead
of aborting the install.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "memomarket._core",
                ["src/memomarket/_core.pyx"],
                # fp-contract off keeps the compiled kernels bit-compatible
                # with the numpy fallback on the exactly-representable cases.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
