"""Build script: compiles the Gibbs sampling kernel when a toolchain is available.

The compiled extension is optional. If Cython or a C compiler is missing the
package still installs and falls back to the pure-Python kernel at import time
(see topiclat.lda). Build in place with:

    python setup.py build_ext --inplace
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Swallow compiler failures so the pure-Python fallback can take over."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain-dependent
            sys.stderr.write(f"warning: extension build skipped: {exc}\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain-dependent
            sys.stderr.write(f"warning: building {ext.name} failed: {exc}\n")


def ext_modules():
    if os.environ.get("TOPICLAT_SKIP_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - install-environment dependent
        return []
    ext = Extension(
        "topiclat._gibbs",
        sources=["src/topiclat/_gibbs.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=ext_modules(), cmdclass={"build_ext": OptionalBuildExt})
