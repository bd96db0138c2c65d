"""Backend selection for the hot kernels.

``RF_CURVATURE_BACKEND`` picks ``numba`` (default when importable) or
``numpy``. ``RF_CURVATURE_THREADS`` caps the numba worker pool; 0 means
let numba decide.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None

if HAVE_NUMBA and "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    # try tbb last; old system TBB builds only produce a warning and a fallback
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_requested = os.environ.get("RF_CURVATURE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"RF_CURVATURE_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


def _apply_thread_cap():
    raw = os.environ.get("RF_CURVATURE_THREADS", "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"RF_CURVATURE_THREADS must be an integer, got {raw!r}")
    if cap < 0:
        raise ValueError("RF_CURVATURE_THREADS must be >= 0")
    if cap and HAVE_NUMBA:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


_apply_thread_cap()


def njit(*args, **kwargs):
    """``numba.njit`` with on-disk caching, or ``None`` when numba is absent."""
    if not HAVE_NUMBA:
        return lambda fn: None
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
