"""Backend selection for the hot query kernels.

The compiled extension (trendcast._ckernels) is used when built; otherwise
the pure-numpy fallback (trendcast._pykernels). Override with the
TRENDCAST_KERNELS environment variable: "auto" (default), "c", or "py".
"""

import os

from trendcast import _pykernels

MAX_DAY = _pykernels.MAX_DAY


def _select():
    choice = os.environ.get("TRENDCAST_KERNELS", "auto").lower()
    if choice not in ("auto", "c", "py"):
        raise ValueError(f"TRENDCAST_KERNELS must be auto, c or py, got {choice!r}")
    if choice in ("auto", "c"):
        try:
            from trendcast import _ckernels

            return _ckernels
        except ImportError:
            if choice == "c":
                raise ImportError(
                    "TRENDCAST_KERNELS=c but the compiled kernels are not built; "
                    "run `python setup.py build_ext --inplace`"
                ) from None
    return _pykernels


_impl = _select()

prefix_counts = _impl.prefix_counts
decay_scores = _impl.decay_scores
decay_scores_grouped = _impl.decay_scores_grouped


def backend_name():
    """Name of the active kernel backend: "c" or "py"."""
    return _impl.BACKEND


def available_backends():
    """All importable backends, keyed by name. Used by tests and benchmarks."""
    backends = {"py": _pykernels}
    try:
        from trendcast import _ckernels

        backends["c"] = _ckernels
    except ImportError:
        pass
    return backends
