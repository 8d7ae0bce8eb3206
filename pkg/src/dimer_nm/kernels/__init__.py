"""Backend selection for the direct RK4 stepper.

The compiled kernel is preferred when the extension built; setting
DIMER_NM_PURE_PYTHON=1 forces the numpy fallback (used by the test
suite and the benchmark to compare both).
"""

import os

from . import _reference

_BACKENDS = {"reference": _reference.rk4_lindblad_steps}
_ACTIVE = "reference"

if os.environ.get("DIMER_NM_PURE_PYTHON", "") != "1":
    try:
        from . import _speedup  # noqa: F401

        _BACKENDS["speedup"] = _speedup.rk4_lindblad_steps
        _ACTIVE = "speedup"
    except ImportError:
        pass


def active_backend() -> str:
    return _ACTIVE


def available_backends() -> dict:
    """Name -> stepper for every backend importable in this process."""
    return dict(_BACKENDS)


def rk4_lindblad_steps(rho, h_eff, jump_ops, rates, dt, n_steps):
    """Advance rho by n_steps of fixed-step RK4 using the active backend."""
    return _BACKENDS[_ACTIVE](rho, h_eff, jump_ops, rates, dt, n_steps)
