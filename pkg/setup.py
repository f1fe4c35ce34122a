"""Build script for the optional compiled core.

The package is fully functional without the extension: ncflow._core falls
back to a vectorized numpy implementation when the compiled module is
missing. Any failure while building the extension therefore only emits a
warning instead of aborting the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that degrades to a pure-Python install on compiler errors."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"compiled core skipped ({exc}); using the numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled core skipped ({exc}); using the numpy fallback")


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "ncflow._core._speedups",
        ["src/ncflow/_core/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
