"""Quadratic M-mode open bosonic systems.

The Hamiltonian is

    H = sum_jk eps_jk a_j^dag a_k + sum_jk (kappa_jk a_j a_k + h.c.)

with every mode either damped or amplified at a rate gamma.  ``epsilon`` is
Hermitian and ``kappa`` symmetric; only those parts are physical.  Frequencies
and rates share the same angular-frequency units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

SYMMETRY_TOL = 1e-12

RateKind = Literal["damped", "amplified"]


class ModelError(ValueError):
    """Invalid system definition."""


@dataclass(frozen=True)
class ModeRate:
    kind: RateKind
    rate: float

    def __post_init__(self):
        if self.kind not in ("damped", "amplified"):
            raise ModelError(f"rate kind must be 'damped' or 'amplified', got {self.kind!r}")
        if not math.isfinite(self.rate) or self.rate < 0:
            raise ModelError(f"rate must be a nonnegative finite number, got {self.rate!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuadraticSystem:
    """M bosonic modes with couplings ``epsilon``/``kappa`` and per-mode rates.

    Construct through :func:`validate` (or :func:`two_mode_system`) to get the
    symmetry constraints enforced.
    """

    epsilon: np.ndarray
    kappa: np.ndarray
    rates: tuple[ModeRate, ...]
    label: str = field(default="", compare=False)

    @property
    def num_modes(self) -> int:
        return len(self.rates)

    @property
    def damping(self) -> np.ndarray:
        return np.array([r.rate if r.kind == "damped" else 0.0 for r in self.rates])

    @property
    def amplification(self) -> np.ndarray:
        return np.array([r.rate if r.kind == "amplified" else 0.0 for r in self.rates])

    def is_net_damped(self) -> bool:
        return float(self.damping.sum()) > float(self.amplification.sum())

    def to_dict(self) -> dict:
        def enc(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return {
            "modes": self.num_modes,
            "epsilon": enc(self.epsilon),
            "kappa": enc(self.kappa),
            "rates": [{"kind": r.kind, "rate": r.rate} for r in self.rates],
        }


def validate(system: QuadraticSystem, tol: float = SYMMETRY_TOL) -> QuadraticSystem:
    """Check dimensions and symmetries; return a copy with them enforced exactly.

    ``epsilon`` is replaced by its Hermitian part and ``kappa`` by its symmetric
    part.  Deviations larger than ``tol`` (relative to the matrix norm, absolute
    below unit norm) raise :class:`ModelError`.  Idempotent.
    """
    rates = tuple(system.rates)
    m = len(rates)
    if m < 1:
        raise ModelError("system needs at least one mode")
    for r in rates:
        if not isinstance(r, ModeRate):
            raise ModelError(f"rates must be ModeRate records, got {r!r}")
    eps = np.asarray(system.epsilon, dtype=complex)
    kap = np.asarray(system.kappa, dtype=complex)
    for name, mat in (("epsilon", eps), ("kappa", kap)):
        if mat.shape != (m, m):
            raise ModelError(f"{name} must be {m}x{m}, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ModelError(f"{name} has non-finite entries")

    scale = max(1.0, float(np.abs(eps).max(initial=0.0)))
    herm_dev = float(np.abs(eps - eps.conj().T).max(initial=0.0))
    if herm_dev > tol * scale:
        raise ModelError(f"epsilon is not Hermitian (max |eps - eps^H| = {herm_dev:.3g})")
    scale = max(1.0, float(np.abs(kap).max(initial=0.0)))
    sym_dev = float(np.abs(kap - kap.T).max(initial=0.0))
    if sym_dev > tol * scale:
        raise ModelError(f"kappa is not symmetric (max |kappa - kappa^T| = {sym_dev:.3g})")

    return QuadraticSystem(
        epsilon=_frozen((eps + eps.conj().T) / 2),
        kappa=_frozen((kap + kap.T) / 2),
        rates=rates,
        label=system.label,
    )


def make_system(epsilon, kappa, rates, label: str = "") -> QuadraticSystem:
    """Convenience constructor: builds and validates in one step.

    ``rates`` may hold :class:`ModeRate` objects, ``(kind, rate)`` tuples or
    ``{"kind": ..., "rate": ...}`` mappings.
    """
    parsed = []
    for r in rates:
        if isinstance(r, ModeRate):
            parsed.append(r)
        elif isinstance(r, dict):
            parsed.append(ModeRate(r["kind"], float(r["rate"])))
        else:
            kind, rate = r
            parsed.append(ModeRate(kind, float(rate)))
    return validate(QuadraticSystem(np.atleast_2d(epsilon), np.atleast_2d(kappa), tuple(parsed), label))


@dataclass(frozen=True)
class TwoModeParams:
    """Two-mode shorthand: mode 1 damped, mode 2 amplified.

    ``epsilon`` is the linear exchange coupling, ``kappa`` the cross pair
    coupling and ``g`` the single-mode squeezing strength.
    """

    gamma1d: float
    gamma2a: float
    epsilon: float
    kappa: float
    g: float

    def __post_init__(self):
        for name in ("gamma1d", "gamma2a", "epsilon", "kappa", "g"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ModelError(f"{name} must be a finite real number, got {v!r}")
        if self.gamma1d < 0 or self.gamma2a < 0:
            raise ModelError("gamma1d and gamma2a must be nonnegative")

    @property
    def gamma_plus(self) -> float:
        return (self.gamma1d + self.gamma2a) / 4

    @property
    def gamma_minus(self) -> float:
        return (self.gamma1d - self.gamma2a) / 4

    @property
    def alpha(self) -> float:
        return math.hypot(self.kappa, self.gamma_plus)

    @property
    def beta(self) -> complex:
        # principal branch; imaginary when |epsilon| < alpha
        return complex(np.sqrt(complex(self.epsilon**2 - self.alpha**2)))

    @property
    def balanced(self) -> bool:
        return self.gamma1d == self.gamma2a

    def canonical(self) -> tuple["TwoModeParams", bool]:
        """Map to ``g >= 0`` by the phase change a_j -> i a_j of both modes.

        That change sends ``(epsilon, kappa, g)`` to ``(epsilon, -kappa, -g)``
        and leaves the spectrum unchanged.  Returns the mapped parameters and
        whether the flip was applied.
        """
        if self.g >= 0:
            return self, False
        return TwoModeParams(self.gamma1d, self.gamma2a, self.epsilon, -self.kappa, -self.g), True

    def to_dict(self) -> dict:
        return {
            "gamma1d": self.gamma1d,
            "gamma2a": self.gamma2a,
            "epsilon": self.epsilon,
            "kappa": self.kappa,
            "g": self.g,
        }


def two_mode_system(p: TwoModeParams) -> QuadraticSystem:
    """Two-mode system with linear coupling, cross pair creation and squeezing.

    Bookkeeping against the general Hamiltonian: the cross term
    ``kappa a1 a2 + h.c.`` is split symmetrically as ``kappa_12 = kappa_21 =
    kappa/2``, and ``(g/2)(a_j^dag^2 + h.c.)`` is stored as ``kappa_jj = g/2``.
    With those factors the dynamics matrix is exactly

        [[-i g1/2,  g,  eps,  kap],
         [-g, -i g1/2, -kap, -eps],
         [eps,  kap,  i g2/2,  g],
         [-kap, -eps,  -g,  i g2/2]].
    """
    eps = np.array([[0.0, p.epsilon], [p.epsilon, 0.0]], dtype=complex)
    kap = np.array([[p.g / 2, p.kappa / 2], [p.kappa / 2, p.g / 2]], dtype=complex)
    rates = (ModeRate("damped", float(p.gamma1d)), ModeRate("amplified", float(p.gamma2a)))
    return validate(QuadraticSystem(eps, kap, rates, label="two-mode"))
