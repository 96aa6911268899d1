"""Numerical kernel dispatch.

The compiled extension is preferred when it imports cleanly; the NumPy
fallback is used otherwise. Selection happens once at import time. Set
SKILLREPRO_NO_NATIVE=1 to force the fallback (used by the benchmark and
by tests that exercise both backends).
"""

import importlib
import os

from . import fallback

_native = None
if not os.environ.get("SKILLREPRO_NO_NATIVE"):
    try:
        _native = importlib.import_module("._native", __name__)
    except ImportError:
        _native = None

_backend = _native if _native is not None else fallback


def using_native() -> bool:
    return _backend is not fallback


def backend_name() -> str:
    return "native" if using_native() else "fallback"


def estep_responsibilities(data, means, chols, log_priors):
    return _backend.estep_responsibilities(data, means, chols, log_priors)


def banded_spd_solve(ab, rhs):
    return _backend.banded_spd_solve(ab, rhs)


def signed_gaussian_field(x, centers, signs, sigmas):
    return _backend.signed_gaussian_field(x, centers, signs, sigmas)
