"""Build script: compiles the ray-casting kernels when Cython is available.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a failed compile only costs query throughput.
"""

from setuptools import Extension, setup

extensions = []
try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "plateforge._kernels._compiled",
                ["src/plateforge/_kernels/_compiled.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=extensions)
