"""Console-script launcher.

Pins the BLAS thread pools to one thread before numpy loads: the hot loops
factor and solve 16x16-scale systems, where threading overhead dominates,
and single-threaded kernels keep runs bit-reproducible across machines with
different core counts.
"""

import os


def entry():
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    os.environ.setdefault("MKL_NUM_THREADS", "1")
    from .cli import main

    raise SystemExit(main())
