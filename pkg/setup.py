"""Build script: compiles the optional solver kernels.

The package is fully functional without the compiled extension -- the
solver falls back to pure-numpy kernels at import time -- so a failed
compile only costs speed, never correctness.  We therefore swallow
build errors instead of failing the install.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  "eopkit will use the pure-Python solver backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "eopkit will use the pure-Python solver backend")


extensions = []
try:
    import os.path

    import numpy as np
    from Cython.Build import cythonize

    if not os.path.exists("src/eopkit/solver/_kernels.pyx"):
        raise ImportError("kernel sources not present")
    extensions = cythonize(
        [
            Extension(
                "eopkit.solver._kernels",
                ["src/eopkit/solver/_kernels.pyx"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    for ext in extensions:
        ext.include_dirs.append(np.get_include())
        ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
except ImportError as exc:
    print(f"warning: {exc}; building eopkit without compiled kernels")

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
