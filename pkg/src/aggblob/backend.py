"""Backend selection for the pairwise hot kernels.

Two implementations of the O(N^2) interaction sums exist: numba-jitted loops
(module ``_pairwise_numba``) and vectorized numpy (``_pairwise_numpy``).
``AGGBLOB_NUMBA=0`` forces the numpy path; the default uses numba when it
imports. ``AGGBLOB_THREADS`` sets the numba thread count (default 1, so runs
are single-threaded unless asked otherwise).
"""

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only where numba is absent
    numba = None
    HAS_NUMBA = False

_flag = os.environ.get("AGGBLOB_NUMBA", "1").strip().lower()
USE_NUMBA = HAS_NUMBA and _flag not in ("0", "false", "off")

# status bits shared by both pairwise implementations; the wrapper in
# pairwise.py converts them to typed exceptions after the sweep finishes
STATUS_OUT_OF_RANGE = 1
STATUS_COINCIDENT = 2


def default_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def configure_threads() -> int:
    """Apply AGGBLOB_THREADS to numba's thread pool; returns the count."""
    n = int(os.environ.get("AGGBLOB_THREADS", "1"))
    if n < 1:
        n = 1
    if HAS_NUMBA:
        numba.set_num_threads(n)
    return n
