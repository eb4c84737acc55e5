"""Backend selection for the hot kernels.

Set ``MEPGRAPHENE_BACKEND=numpy`` to force the vectorised numpy path even
when numba is importable.  ``THREADS`` caps numba's thread pool.
"""
import os

_requested = os.environ.get("MEPGRAPHENE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(
        f"MEPGRAPHENE_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"

if HAVE_NUMBA and "THREADS" in os.environ:
    try:
        numba.set_num_threads(max(1, min(int(os.environ["THREADS"]),
                                         numba.config.NUMBA_NUM_THREADS)))
    except ValueError:
        pass
