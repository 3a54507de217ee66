import os

# One BLAS thread per process: the suite parallelizes at the process level
# and oversubscription on small CI boxes makes dense solves erratic.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
