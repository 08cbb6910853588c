"""Build script: compiles the optional Cython closure kernel.

The package is fully functional without the extension; tendongrip.engine
falls back to the pure-Python kernel when the compiled module is missing.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"skipping compiled kernel ({exc}); "
                          "tendongrip will use the pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); "
                          "tendongrip will use the pure-Python fallback")


try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("tendongrip._kernel", ["src/tendongrip/_kernel.pyx"])],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
