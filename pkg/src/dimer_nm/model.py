"""Model builders for a coupled two-site dimer dephased by damped modes.

The dimer is restricted to its one-excitation sector, ordered
``[|01>, |10>]`` in the site basis (entry 0: excitation on site 2).
Each site couples through its population to a locally damped bosonic
mode; the hierarchy of models built here:

* ``build_full_model``      sector x mode1 x mode2, site basis
* ``build_symmetric_model`` sector x relative mode, delocalized basis
  (valid when both sites and modes are identical; the center-of-mass
  mode decouples exactly on the one-excitation sector)
* ``build_global_mode_model`` both sites coupled to one shared mode
* ``build_markovian_dephasing_model`` memoryless phase-flip baseline

All builders return a :class:`LindbladModel` whose ``h_eff`` field is the
effective non-Hermitian Hamiltonian, i.e. the mode damping term
``-i kappa a^dag a`` is already included. The master equation is

    rho_dot = -i (h_eff rho - rho h_eff^dag) + sum_k rate_k L_k rho L_k^dag

Consumers must never subtract another ``-i/2 sum rate L^dag L`` shift;
doing so double-counts the damping.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import opalg
from .errors import DimensionError, DimerNMError

SITE_BASIS = "site"
DELOCALIZED_BASIS = "delocalized"

# sqrt(2)-normalized rotation between [|01>, |10>] and [|u>, |d>];
# involutive, so it serves for both directions.
DELOCALIZE = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the dimer-plus-modes system.

    g and kappa are the per-site mode coupling and mode linewidth; the
    amplitude damping rate of each mode is 2*kappa (the intensity
    linewidth), so ``<a>(t)`` relaxes as ``exp(-kappa t)``.
    """

    omega1: float = 0.0
    omega2: float = 0.0
    J: float = 1.0
    Omega1: float = 2.0
    Omega2: float = 2.0
    g1: float = 1.0
    g2: float = 1.0
    kappa1: float = 20.0
    kappa2: float = 20.0
    n_fock: int = 3
    n_th: float = 0.0

    def __post_init__(self):
        if self.J <= 0:
            raise DimerNMError(f"exchange coupling must be positive, got {self.J}")
        if self.n_fock < 2:
            raise DimerNMError(f"n_fock must be >= 2, got {self.n_fock}")
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise DimerNMError("mode linewidths must be non-negative")
        if self.n_th < 0:
            raise DimerNMError(f"thermal occupation must be >= 0, got {self.n_th}")

    @classmethod
    def symmetric(cls, omega=0.0, J=1.0, Omega=2.0, g=1.0, kappa=20.0,
                  n_fock=3, n_th=0.0):
        return cls(omega1=omega, omega2=omega, J=J, Omega1=Omega, Omega2=Omega,
                   g1=g, g2=g, kappa1=kappa, kappa2=kappa,
                   n_fock=n_fock, n_th=n_th)

    @property
    def is_symmetric(self) -> bool:
        return (self.omega1 == self.omega2 and self.Omega1 == self.Omega2
                and self.g1 == self.g2 and self.kappa1 == self.kappa2)


@dataclass(frozen=True)
class FParametrization:
    """One-knob family g = sqrt(f) g0, kappa = f kappa0.

    The effective dephasing rate 2 g^2 / kappa is invariant along the
    family, so f tunes the memory of the environment at fixed noise
    strength.
    """

    f: float
    g0: float = 1.0
    kappa0: float = 20.0

    def __post_init__(self):
        if self.f <= 0:
            raise DimerNMError(f"f must be positive, got {self.f}")

    @property
    def g(self) -> float:
        return math.sqrt(self.f) * self.g0

    @property
    def kappa(self) -> float:
        return self.f * self.kappa0


def apply_f(fp, base: ModelParams) -> ModelParams:
    """Scale the base couplings and linewidths along the f-family.

    ``fp`` is an :class:`FParametrization` or a bare float f. The base
    parameters carry the f=1 couplings (g0 per site) and linewidths
    (kappa0 per site); the returned set has g_i = sqrt(f) g_i(base),
    kappa_i = f kappa_i(base), leaving 2 g_i^2 / kappa_i exactly fixed.
    """
    f = fp.f if isinstance(fp, FParametrization) else float(fp)
    if f <= 0:
        raise DimerNMError(f"f must be positive, got {f}")
    root = math.sqrt(f)
    return ModelParams(
        omega1=base.omega1, omega2=base.omega2, J=base.J,
        Omega1=base.Omega1, Omega2=base.Omega2,
        g1=base.g1 * root, g2=base.g2 * root,
        kappa1=base.kappa1 * f, kappa2=base.kappa2 * f,
        n_fock=base.n_fock, n_th=base.n_th,
    )


def effective_dephasing_rate(g: float, kappa: float) -> float:
    """Adiabatic-elimination dephasing rate 2 g^2 / kappa."""
    if kappa <= 0:
        raise DimerNMError("effective rate undefined for kappa <= 0")
    return 2.0 * g * g / kappa


@dataclass(frozen=True)
class LindbladModel:
    """Effective Hamiltonian plus jump channels on a product space.

    h_eff already contains the anti-Hermitian damping shift
    ``-i/2 sum_k rate_k L_k^dag L_k``; ``h_herm`` recovers the bare
    Hamiltonian. ``basis`` records how the sector slot (always slot 0)
    is ordered, for downstream observables.
    """

    h_eff: np.ndarray
    jumps: tuple
    dims: tuple
    basis: str
    n_th: float = 0.0
    label: str = ""
    # occupation of one physical oscillator per quantum of a model mode:
    # 0.5 when the model mode is the relative combination of two local
    # modes (the center of mass stays dark, so each local oscillator
    # carries exactly half), 1.0 when model modes are physical.
    mode_weight: float = 1.0

    def __post_init__(self):
        d = int(np.prod(self.dims))
        if self.h_eff.shape != (d, d):
            raise DimensionError(
                f"h_eff shape {self.h_eff.shape} does not match dims {self.dims}"
            )
        for op, rate in self.jumps:
            if op.shape != (d, d):
                raise DimensionError(f"jump shape {op.shape} does not match dims")
            if rate < 0:
                raise DimerNMError(f"jump rate must be non-negative, got {rate}")
        if self.basis not in (SITE_BASIS, DELOCALIZED_BASIS):
            raise DimerNMError(f"unknown basis tag {self.basis!r}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def h_herm(self) -> np.ndarray:
        return opalg.hermitize(self.h_eff)

    def damping_defect(self) -> float:
        """Consistency residual between h_eff's anti-Hermitian part and the jumps.

        Returns max|i (h_eff - h_eff^dag) - sum rate L^dag L|; zero for a
        correctly assembled model.
        """
        acc = 1j * (self.h_eff - self.h_eff.conj().T)
        for op, rate in self.jumps:
            acc = acc - rate * (op.conj().T @ op)
        return float(np.abs(acc).max())


def _h_eff_from(h_herm, jumps):
    shift = np.zeros_like(h_herm)
    for op, rate in jumps:
        shift += rate * (op.conj().T @ op)
    return h_herm - 0.5j * shift


def _mode_jumps(destroy_ops, kappas, n_th):
    jumps = []
    for a, kappa in zip(destroy_ops, kappas):
        if kappa == 0:
            continue
        jumps.append((a, 2.0 * kappa * (1.0 + n_th)))
        if n_th > 0:
            jumps.append((a.conj().T, 2.0 * kappa * n_th))
    return tuple(jumps)


def _sector_site(p: ModelParams):
    return np.array([[p.omega2, p.J], [p.J, p.omega1]], dtype=complex)


def build_full_model(p: ModelParams) -> LindbladModel:
    """Dimer sector plus both local modes. dims = (2, n_fock, n_fock)."""
    nf = p.n_fock
    dims = (2, nf, nf)
    a = opalg.make_destroy(nf)
    x = a + a.conj().T
    n = a.conj().T @ a
    # site populations on the sector: sigma_z of site 1 is diag(-1, +1)
    sz1 = np.diag([-1.0, 1.0]).astype(complex)
    sz2 = -sz1

    h = opalg.embed(_sector_site(p), 0, dims)
    h += p.Omega1 * opalg.embed(n, 1, dims) + p.Omega2 * opalg.embed(n, 2, dims)
    h += p.g1 * opalg.embed(sz1, 0, dims) @ opalg.embed(x, 1, dims)
    h += p.g2 * opalg.embed(sz2, 0, dims) @ opalg.embed(x, 2, dims)

    jumps = _mode_jumps(
        (opalg.embed(a, 1, dims), opalg.embed(a, 2, dims)),
        (p.kappa1, p.kappa2),
        p.n_th,
    )
    return LindbladModel(
        h_eff=_h_eff_from(h, jumps), jumps=jumps, dims=dims,
        basis=SITE_BASIS, n_th=p.n_th, label="full",
    )


def build_symmetric_model(p: ModelParams) -> LindbladModel:
    """Sector plus the relative mode, in the delocalized basis [|u>, |d>].

    Exact reduction of the full symmetric model: on the one-excitation
    sector the site populations couple only the relative combination of
    the two modes (with strength sqrt(2) g) while the center of mass
    stays dark. dims = (2, n_fock).
    """
    if not p.is_symmetric:
        raise DimerNMError("symmetric model requires identical sites and modes")
    nf = p.n_fock
    dims = (2, nf)
    a = opalg.make_destroy(nf)
    x = a + a.conj().T
    n = a.conj().T @ a
    omega, Omega, g, kappa = p.omega1, p.Omega1, p.g1, p.kappa1

    h_sector = np.diag([omega + p.J, omega - p.J]).astype(complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    h = opalg.embed(h_sector, 0, dims)
    h += Omega * opalg.embed(n, 1, dims)
    h += math.sqrt(2.0) * g * opalg.embed(sx, 0, dims) @ opalg.embed(x, 1, dims)

    jumps = _mode_jumps((opalg.embed(a, 1, dims),), (kappa,), p.n_th)
    return LindbladModel(
        h_eff=_h_eff_from(h, jumps), jumps=jumps, dims=dims,
        basis=DELOCALIZED_BASIS, n_th=p.n_th, label="symmetric",
        mode_weight=0.5,
    )


def build_global_mode_model(p: ModelParams) -> LindbladModel:
    """Both sites coupled to one shared damped mode. dims = (2, n_fock).

    The sector sees the mode through g1 sz1 + g2 sz2; for equal couplings
    this vanishes identically on the one-excitation sector, so only the
    coupling imbalance g1 - g2 enters. Built in the delocalized basis.
    """
    if p.Omega1 != p.Omega2 or p.kappa1 != p.kappa2:
        raise DimerNMError("global-mode model has a single mode: Omega and kappa must match")
    nf = p.n_fock
    dims = (2, nf)
    a = opalg.make_destroy(nf)
    x = a + a.conj().T
    n = a.conj().T @ a

    w = DELOCALIZE
    h_sector = w @ _sector_site(p) @ w
    # g1 sz1 + g2 sz2 = (g1 - g2) diag(-1, 1) in the site ordering
    coupling = w @ np.diag([-(p.g1 - p.g2), p.g1 - p.g2]).astype(complex) @ w

    h = opalg.embed(h_sector, 0, dims)
    h += p.Omega1 * opalg.embed(n, 1, dims)
    h += opalg.embed(coupling, 0, dims) @ opalg.embed(x, 1, dims)

    jumps = _mode_jumps((opalg.embed(a, 1, dims),), (p.kappa1,), p.n_th)
    return LindbladModel(
        h_eff=_h_eff_from(h, jumps), jumps=jumps, dims=dims,
        basis=DELOCALIZED_BASIS, n_th=p.n_th, label="global-mode",
    )


def build_markovian_dephasing_model(gamma_eff: float, p: ModelParams) -> LindbladModel:
    """Memoryless baseline: local phase flips at the effective rate.

    Each site carries a sigma_z jump at rate gamma_eff / 2; no mode slot.
    dims = (2,), site basis.
    """
    if gamma_eff < 0:
        raise DimerNMError(f"dephasing rate must be non-negative, got {gamma_eff}")
    dims = (2,)
    sz1 = np.diag([-1.0, 1.0]).astype(complex)
    sz2 = -sz1
    jumps = tuple() if gamma_eff == 0 else (
        (sz1, gamma_eff / 2.0),
        (sz2, gamma_eff / 2.0),
    )
    h = _sector_site(p)
    return LindbladModel(
        h_eff=_h_eff_from(h, jumps), jumps=jumps, dims=dims,
        basis=SITE_BASIS, n_th=0.0, label="markov-dephasing",
    )


def steady_state_dd_closed_form(p: ModelParams) -> float:
    """Two-level-mode estimate of the steady singlet population.

    rho_dd = (4 g^2 + kappa^2 + (2J + Omega)^2)
             / (2 (4 g^2 + kappa^2 + 4 J^2 + Omega^2))

    Exact for the symmetric model truncated at n_fock = 2 (the relative
    mode holding at most one quantum); approaches 1 as f -> 0 with the
    mode quasi-resonant (Omega ~ 2J).
    """
    if not p.is_symmetric:
        raise DimerNMError("closed form is defined for symmetric parameters")
    g, kappa, J, Omega = p.g1, p.kappa1, p.J, p.Omega1
    num = 4.0 * g ** 2 + kappa ** 2 + (2.0 * J + Omega) ** 2
    den = 2.0 * (4.0 * g ** 2 + kappa ** 2 + 4.0 * J ** 2 + Omega ** 2)
    return num / den


def thermal_mode_state(n_fock: int, n_th: float) -> np.ndarray:
    """Truncated thermal density matrix of one mode (vacuum for n_th = 0)."""
    if n_th < 0:
        raise DimerNMError(f"thermal occupation must be >= 0, got {n_th}")
    if n_th == 0:
        rho = np.zeros((n_fock, n_fock), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    weights = (n_th / (1.0 + n_th)) ** np.arange(n_fock)
    weights /= weights.sum()
    return np.diag(weights).astype(complex)


def environment_state(model: LindbladModel) -> np.ndarray:
    """Initial state of the non-sector slots (thermal product, vacuum at T=0).

    Returns a 0-dimensional identity-like 1x1 matrix when the model has
    no environment slot (the memoryless baseline).
    """
    env_dims = model.dims[1:]
    rho = np.eye(1, dtype=complex)
    for d in env_dims:
        rho = opalg.kron(rho, thermal_mode_state(d, model.n_th))
    return rho
