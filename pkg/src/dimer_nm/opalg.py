"""Dense operator algebra on tensor-product Hilbert spaces.

Conventions used everywhere in the package:

* operators are dense complex numpy arrays,
* a composite space is described by a tuple ``dims`` of subsystem
  dimensions, slot 0 leftmost, basis ordered row-major lexicographically
  (slot 0 is the slowest index),
* ``vec`` stacks columns (Fortran order), so a superoperator acting as
  ``A rho B`` has matrix ``kron(B.T, A)``.

Heavy factorizations delegate to LAPACK through numpy; the functions here
add the shape/Hermiticity validation and error reporting the rest of the
package relies on.
"""

import math

import numpy as np

from .errors import DimensionError, NonHermitianError, SingularSystemError

HERMITICITY_RTOL = 1e-12
SOLVE_RESIDUAL_RTOL = 1e-9


def _as_complex(a):
    return np.ascontiguousarray(np.asarray(a, dtype=complex))


def _check_square(a, name="operator"):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def _check_dims(a, dims, name="operator"):
    d = int(np.prod(dims))
    if a.shape != (d, d):
        raise DimensionError(
            f"{name} shape {a.shape} does not match dims {tuple(dims)} (product {d})"
        )


def hermiticity_defect(a) -> float:
    """Largest entry of ``|A - A^dag|``; zero for exactly Hermitian input."""
    a = np.asarray(a)
    return float(np.abs(a - a.conj().T).max()) if a.size else 0.0


def hermitize(a):
    """Return the Hermitian part ``(A + A^dag) / 2``."""
    a = _as_complex(a)
    _check_square(a)
    return (a + a.conj().T) / 2.0


def _require_hermitian(a, name):
    defect = hermiticity_defect(a)
    scale = float(np.abs(a).max()) if a.size else 0.0
    if defect > HERMITICITY_RTOL * max(scale, 1e-300):
        raise NonHermitianError(
            f"{name} requires Hermitian input: defect {defect:.3e} "
            f"exceeds {HERMITICITY_RTOL:.0e} * max|A| = {HERMITICITY_RTOL * scale:.3e}"
        )


def kron(a, b):
    """Kronecker product with slot 0 on the left."""
    return np.kron(_as_complex(a), _as_complex(b))


def embed(op, slot: int, dims):
    """Lift a single-subsystem operator to the full product space.

    Parameters
    ----------
    op : (d_slot, d_slot) array
    slot : which subsystem the operator acts on
    dims : subsystem dimensions, slot 0 leftmost
    """
    dims = tuple(int(d) for d in dims)
    op = _as_complex(op)
    _check_square(op, "embedded operator")
    if not 0 <= slot < len(dims):
        raise DimensionError(f"slot {slot} outside dims of length {len(dims)}")
    if op.shape[0] != dims[slot]:
        raise DimensionError(
            f"operator of dimension {op.shape[0]} cannot occupy slot {slot} "
            f"of dimension {dims[slot]}"
        )
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        out = np.kron(out, op if i == slot else np.eye(d, dtype=complex))
    return out


def make_destroy(n_fock: int):
    """Truncated bosonic annihilation operator on an n_fock-level ladder."""
    if n_fock < 2:
        raise DimensionError(f"mode needs at least 2 levels, got {n_fock}")
    return np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), 1).astype(complex)


def partial_trace(rho, dims, keep):
    """Trace out every slot not listed in ``keep``.

    The result is ordered by the original slot order of the kept
    subsystems regardless of the order given in ``keep``.
    """
    dims = tuple(int(d) for d in dims)
    rho = _as_complex(rho)
    _check_dims(rho, dims, "state")
    keep = sorted(set(int(k) for k in keep))
    if keep and not (0 <= keep[0] and keep[-1] < len(dims)):
        raise DimensionError(f"keep={keep} outside dims of length {len(dims)}")
    n = len(dims)
    t = rho.reshape(dims + dims)
    ndim_left = n
    for slot in sorted((i for i in range(n) if i not in keep), reverse=True):
        t = np.trace(t, axis1=slot, axis2=slot + ndim_left)
        ndim_left -= 1
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.ascontiguousarray(t.reshape(d_keep, d_keep))


def partial_transpose(rho, dims, slot: int):
    """Transpose one tensor slot in place, leaving the others untouched."""
    dims = tuple(int(d) for d in dims)
    rho = _as_complex(rho)
    _check_dims(rho, dims, "state")
    n = len(dims)
    if not 0 <= slot < n:
        raise DimensionError(f"slot {slot} outside dims of length {n}")
    t = rho.reshape(dims + dims)
    t = np.swapaxes(t, slot, slot + n)
    d = int(np.prod(dims))
    return np.ascontiguousarray(t.reshape(d, d))


def hermitian_eigen(a):
    """Eigenvalues of a Hermitian matrix, ascending.

    Input is validated against a relative Hermiticity tolerance and
    symmetrized before the solve, so eigenvalues are exactly real.
    """
    a = _as_complex(a)
    _check_square(a)
    _require_hermitian(a, "hermitian_eigen")
    return np.linalg.eigvalsh(hermitize(a))


def trace_norm(a) -> float:
    """Sum of absolute eigenvalues. Restricted to Hermitian input.

    For the Hermitian matrices this package produces (density operators,
    partial transposes, Choi matrices) the trace norm is exactly the sum
    of |eigenvalue|; anything non-Hermitian is rejected rather than
    silently routed through a singular-value fallback.
    """
    a = _as_complex(a)
    _check_square(a)
    _require_hermitian(a, "trace_norm")
    return float(np.abs(np.linalg.eigvalsh(hermitize(a))).sum())


def solve_linear(a, b):
    """Solve ``A x = b`` with a residual check.

    b may be a vector or a matrix of stacked right-hand sides. Raises
    SingularSystemError carrying a condition estimate when the system is
    singular or the residual exceeds
    ``1e-9 * (||A|| ||x|| + ||b||)`` (Frobenius norms).
    """
    a = _as_complex(a)
    _check_square(a, "coefficient matrix")
    b = np.asarray(b, dtype=complex)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "linear system is singular", cond=_cond_estimate(a)
        ) from exc
    resid = float(np.linalg.norm(a @ x - b))
    bound = SOLVE_RESIDUAL_RTOL * (
        float(np.linalg.norm(a)) * float(np.linalg.norm(x)) + float(np.linalg.norm(b))
    )
    if not np.isfinite(resid) or resid > bound:
        raise SingularSystemError(
            f"solve residual {resid:.3e} exceeds bound {bound:.3e}",
            cond=_cond_estimate(a),
        )
    return x


def _cond_estimate(a) -> float:
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError:
        return math.inf
    if s[-1] == 0.0 or not np.isfinite(s[-1]):
        return math.inf
    return float(s[0] / s[-1])


def condition_number(a) -> float:
    """Two-norm condition estimate (inf when exactly singular)."""
    return _cond_estimate(_as_complex(a))


def vec(rho):
    """Column-stack a matrix into a vector (Fortran order)."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v):
    """Inverse of :func:`vec` for square matrices."""
    v = np.asarray(v, dtype=complex)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise DimensionError(f"vector of length {v.size} is not a square matrix")
    return v.reshape(d, d, order="F")
