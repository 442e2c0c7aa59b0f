import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# libnpyrandom ships inside numpy and provides the C distribution functions
npyrandom_lib = os.path.join(os.path.dirname(np.__file__), "random", "lib")

extensions = [
    Extension(
        "metropolis_epi._ckernel",
        ["src/metropolis_epi/_ckernel.pyx"],
        include_dirs=[np.get_include()],
        library_dirs=[npyrandom_lib],
        libraries=["npyrandom", "m"],
        # bit-for-bit parity with the Python fallback needs unfused arithmetic
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
