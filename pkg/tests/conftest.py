"""Pin BLAS pools to one thread before numpy loads.

The suite factors and solves 16x16-scale systems where thread fan-out costs
more than it saves, and single-threaded kernels keep results reproducible
across machines.
"""

import os

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
