"""Heisenberg-Langevin dynamics matrices and their eigenstructure.

Operators are stacked as ``(a_1, a_1^dag, ..., a_M, a_M^dag)`` and evolve as
``d a/dt = -i M a + L`` with delta-correlated Langevin forces ``L``.
``noise_corr[i, j]`` is the coefficient of ``delta(t - t')`` in
``<L_i(t) L_j(t')>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigen import cluster, eigvals, null_space, nullity
from .model import QuadraticSystem, TwoModeParams, two_mode_system

DEFAULT_RANK_TOL = 1e-8
DEFAULT_CLUSTER_TOL = 1e-6


class PairingError(ValueError):
    """An eigenvalue has no ``-conj`` partner within tolerance."""

    def __init__(self, unpaired, tol):
        self.unpaired = [complex(v) for v in unpaired]
        self.tol = tol
        super().__init__(f"no (Omega, -Omega*) partner within {tol:.3g} for {self.unpaired}")


class SingularTransformError(ValueError):
    """The eigenvector matrix is rank deficient (exceptional point)."""


@dataclass(frozen=True, eq=False)
class DynamicsMatrix:
    m_omega: np.ndarray
    noise_corr: np.ndarray

    @property
    def num_modes(self) -> int:
        return self.m_omega.shape[0] // 2


@dataclass(frozen=True, eq=False)
class BasicSpectrum:
    """Basic eigenfrequencies and the transformation to diagonal operators.

    ``omegas`` is ordered in slot pairs ``(2j, 2j+1)`` labelled ``b_j`` and
    ``b_j^dag``.  ``pairing`` lists the actual ``(Omega, -Omega*)`` partners;
    purely imaginary frequencies are their own partners and appear as
    ``(i, i)``.  When the matrix is defective ``p_matrix`` holds a Jordan
    basis (chains of length two) and ``nilpotent`` the superdiagonal part,
    so that ``P^-1 M P = diag(omegas) + nilpotent``; ``p_matrix`` is ``None``
    if no such basis could be built.
    """

    omegas: np.ndarray
    pairing: tuple[tuple[int, int], ...]
    diagonalizable: bool
    p_matrix: np.ndarray | None = None
    p_inverse: np.ndarray | None = None
    nilpotent: np.ndarray | None = None
    coalescing: tuple[int, ...] = ()
    raw_vectors: np.ndarray | None = None
    m_omega: np.ndarray | None = None
    phase_flipped: bool = False
    residual: float = 0.0
    notes: tuple[str, ...] = field(default=())

    @property
    def num_modes(self) -> int:
        return len(self.omegas) // 2

    def jordan_matrix(self) -> np.ndarray:
        """``diag(omegas) + nilpotent``; the nilpotent part is read from the
        coalescing slot pairs when no basis was stored."""
        j = np.diag(np.asarray(self.omegas, dtype=complex))
        if self.nilpotent is not None:
            return j + self.nilpotent
        for pair in self.coalescing:
            j[2 * pair, 2 * pair + 1] = 1.0
        return j

    def to_dict(self) -> dict:
        return {
            "omegas": [[float(w.real), float(w.imag)] for w in self.omegas],
            "pairing": [list(p) for p in self.pairing],
            "diagonalizable": bool(self.diagonalizable),
        }


def build_dynamics_matrix(system: QuadraticSystem) -> DynamicsMatrix:
    """Drift matrix and Langevin correlators of a validated system.

    From ``i[H, a_m]``: the ``a_m`` row carries ``eps_mk`` on ``a_k`` and
    ``2 conj(kappa_mk)`` on ``a_k^dag``; the ``a_m^dag`` row is its negated
    conjugate.  Damping adds ``-i gamma/2`` and amplification ``+i gamma/2``
    to both diagonal entries of the mode.
    """
    m = system.num_modes
    eps = np.asarray(system.epsilon, dtype=complex)
    kap = np.asarray(system.kappa, dtype=complex)
    mo = np.zeros((2 * m, 2 * m), dtype=complex)
    noise = np.zeros((2 * m, 2 * m), dtype=complex)
    for j in range(m):
        for k in range(m):
            mo[2 * j, 2 * k] = eps[j, k]
            mo[2 * j, 2 * k + 1] = 2 * np.conj(kap[j, k])
            mo[2 * j + 1, 2 * k + 1] = -np.conj(eps[j, k])
            mo[2 * j + 1, 2 * k] = -2 * kap[j, k]
    for j, r in enumerate(system.rates):
        if r.kind == "damped":
            mo[2 * j, 2 * j] -= 0.5j * r.rate
            mo[2 * j + 1, 2 * j + 1] -= 0.5j * r.rate
            noise[2 * j, 2 * j + 1] = r.rate
        else:
            mo[2 * j, 2 * j] += 0.5j * r.rate
            mo[2 * j + 1, 2 * j + 1] += 0.5j * r.rate
            noise[2 * j + 1, 2 * j] = r.rate
    mo.setflags(write=False)
    noise.setflags(write=False)
    return DynamicsMatrix(mo, noise)


def two_mode_matrix(p: TwoModeParams) -> np.ndarray:
    """The two-mode drift matrix written out entry by entry."""
    g1, g2, e, k, g = p.gamma1d, p.gamma2a, p.epsilon, p.kappa, p.g
    return np.array(
        [
            [-0.5j * g1, g, e, k],
            [-g, -0.5j * g1, -k, -e],
            [e, k, 0.5j * g2, g],
            [-k, -e, -g, 0.5j * g2],
        ],
        dtype=complex,
    )


def commutator_matrix(num_modes: int) -> np.ndarray:
    """``C[i, j] = [a_i, a_j]`` for the stacked operator vector."""
    c = np.zeros((2 * num_modes, 2 * num_modes), dtype=complex)
    for j in range(num_modes):
        c[2 * j, 2 * j + 1] = 1.0
        c[2 * j + 1, 2 * j] = -1.0
    return c


# --- pairing -----------------------------------------------------------------


def pair_eigenvalues(values, tol: float) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Match every eigenvalue with its ``-conj`` partner.

    Returns ``(slots, pairing)``: ``slots`` groups the indices two by two
    (first member has the larger real part, or larger imaginary part for
    self-partnered values), ``pairing`` the partner relation.  Self-partnered
    (purely imaginary) values are grouped nested by imaginary part so that
    ``+-i y - i c`` end up together.
    """
    values = np.asarray(values, dtype=complex)
    n = len(values)
    unmatched = set(range(n))
    slots: list[tuple[int, int]] = []
    pairing: list[tuple[int, int]] = []
    order = sorted(range(n), key=lambda i: (-abs(values[i].real), -values[i].imag, i))
    selfish = []
    for i in order:
        if i not in unmatched:
            continue
        if abs(values[i].real) <= tol / 2:
            unmatched.discard(i)
            selfish.append(i)
            continue
        unmatched.discard(i)
        target = -np.conj(values[i])
        cands = [j for j in unmatched]
        if not cands:
            raise PairingError([values[i]], tol)
        j = min(cands, key=lambda c: (abs(values[c] - target), c))
        if abs(values[j] - target) > tol:
            raise PairingError([values[i]], tol)
        unmatched.discard(j)
        first, second = (i, j) if values[i].real >= values[j].real else (j, i)
        slots.append((first, second))
        pairing.append((first, second))
    if len(selfish) % 2:
        raise PairingError([values[i] for i in selfish], tol)
    selfish.sort(key=lambda i: (-values[i].imag, i))
    while selfish:
        a = selfish.pop(0)
        b = selfish.pop(-1)
        slots.append((a, b))
        pairing.extend([(a, a), (b, b)])
    return slots, pairing


# --- eigendecomposition -----------------------------------------------------------


def _cluster_structure(m, values, rank_tol, cluster_tol):
    norm = float(np.linalg.norm(m, 2))
    radius = cluster_tol * max(1.0, norm)
    out = []
    for grp in cluster(values, radius):
        lam = complex(np.mean(values[grp]))
        alg = len(grp)
        geo = 1 if alg == 1 else min(alg, nullity(m - lam * np.eye(len(m)), rank_tol, max(norm, 1.0)))
        out.append((grp, lam, alg, max(geo, 1)))
    return out


def eigendecompose(
    d: DynamicsMatrix | np.ndarray,
    tol: float | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> BasicSpectrum:
    """Diagonalize the drift matrix, or bring it to Jordan form at an EP.

    Parameters
    ----------
    d
        Dynamics matrix (or the bare drift matrix).
    tol
        Pair-matching tolerance; default ``1e-9 * max(1, ||M||)``.
    rank_tol
        Relative singular-value threshold for null-space dimensions.
    cluster_tol
        Eigenvalues closer than ``cluster_tol * max(1, ||M||)`` are treated
        as one degenerate cluster.  Defective clusters are snapped to their
        mean, which is well conditioned even where the members are not.
    """
    m = np.asarray(d.m_omega if isinstance(d, DynamicsMatrix) else d, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n) or n % 2:
        raise ValueError("drift matrix must be square with even dimension")
    if not np.all(np.isfinite(m)):
        raise ValueError("drift matrix has non-finite entries")
    norm = float(np.linalg.norm(m, 2))
    if tol is None:
        tol = 1e-9 * max(1.0, norm)

    values = eigvals(m)
    structure = _cluster_structure(m, values, rank_tol, cluster_tol)
    defective_members = set()
    for grp, lam, alg, geo in structure:
        if geo < alg:
            values[grp] = lam
            defective_members.update(grp)

    slots, pairing = pair_eigenvalues(values, tol)
    slots.sort(
        key=lambda s: (
            0 if (s[0] in defective_members and s[1] in defective_members) else 1,
            -abs(values[s[0]].real),
            -values[s[0]].imag,
        )
    )
    order = [i for s in slots for i in s]
    position = {old: new for new, old in enumerate(order)}
    omegas = values[order]
    pairing = tuple(sorted((position[a], position[b]) for a, b in pairing))

    p = np.zeros((n, n), dtype=complex)
    nil = np.zeros((n, n), dtype=complex)
    diagonalizable = all(geo == alg for _, _, alg, geo in structure)
    basis_ok = True
    notes = []
    eye = np.eye(n)
    for grp, lam, alg, geo in structure:
        pos = sorted(position[i] for i in grp)
        a = m - lam * eye
        if geo == alg:
            _, _, vh = np.linalg.svd(a)
            vecs = vh[n - alg :].conj().T
            for k, col in enumerate(pos):
                p[:, col] = vecs[:, k]
        elif alg == 2 * geo:
            u = null_space(a, rank_tol)[:, :geo]
            if u.shape[1] != geo:
                basis_ok = False
                continue
            w = np.linalg.pinv(a, rcond=rank_tol) @ u
            # chains on slot pairs where possible
            slot_pairs = [q for q in range(n // 2) if 2 * q in pos and 2 * q + 1 in pos]
            cols = [(2 * q, 2 * q + 1) for q in slot_pairs]
            rest = [c for c in pos if all(c not in cc for cc in cols)]
            cols += [(rest[i], rest[i + 1]) for i in range(0, len(rest), 2)]
            for k, (c0, c1) in enumerate(cols):
                p[:, c0] = u[:, k]
                p[:, c1] = w[:, k]
                nil[c0, c1] = 1.0
        else:
            basis_ok = False
            notes.append(f"cluster at {lam:.6g}: algebraic {alg}, geometric {geo}; no length-2 Jordan basis")

    coalescing = tuple(j for j in range(n // 2) if nil[2 * j, 2 * j + 1] != 0)
    if not basis_ok:
        return BasicSpectrum(
            omegas=omegas,
            pairing=pairing,
            diagonalizable=diagonalizable,
            coalescing=coalescing,
            m_omega=m,
            notes=tuple(notes),
        )
    p_inv = np.linalg.inv(p)
    resid = float(np.linalg.norm(p_inv @ m @ p - np.diag(omegas) - nil) / max(norm, 1e-300))
    return BasicSpectrum(
        omegas=omegas,
        pairing=pairing,
        diagonalizable=diagonalizable,
        p_matrix=p,
        p_inverse=p_inv,
        nilpotent=nil,
        coalescing=coalescing,
        m_omega=m,
        residual=resid,
        notes=tuple(notes),
    )


# --- two-mode closed form -------------------------------------------------------


def _eq49_vector(q: TwoModeParams, omega_r: complex, sign: int) -> np.ndarray:
    # printed vector; it belongs to the eigenfrequency -omega_r - i*gamma_minus
    e, k, g = q.epsilon, q.kappa, q.g
    gp, a = q.gamma_plus, q.alpha
    s = sign
    return np.array(
        [
            -e * k + 1j * gp * (g - s * a) - s * a * omega_r,
            a * a - s * g * a - 1j * gp * omega_r,
            s * e * a + k * omega_r,
            k * (g - s * a) - 1j * gp * e,
        ],
        dtype=complex,
    )


def two_mode_closed_form(
    p: TwoModeParams,
    rank_tol: float = DEFAULT_RANK_TOL,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> BasicSpectrum:
    """Analytic eigenfrequencies and eigenvectors of the two-mode system.

    Frequencies are ``+-W1 - i gm`` and ``+-W2 - i gm`` with
    ``W1,2 = sqrt(eps^2 - (alpha -+ g)^2)`` on the principal branch, so ``W``
    may be imaginary.  Eigenvectors use the analytic formula, which assumes
    ``g >= 0``; negative ``g`` is handled by the phase change documented in
    :meth:`TwoModeParams.canonical` and ``phase_flipped`` is set.
    """
    q, flipped = p.canonical()
    gm, a, g = q.gamma_minus, q.alpha, q.g
    b2 = q.epsilon**2 - a * a
    w1 = complex(np.sqrt(complex(b2 - g * g + 2 * g * a)))
    w2 = complex(np.sqrt(complex(b2 - g * g - 2 * g * a)))
    omegas = np.array([w1, -w1, w2, -w2], dtype=complex) - 1j * gm

    raw = np.column_stack(
        [
            _eq49_vector(q, -w1, +1),
            _eq49_vector(q, w1, +1),
            _eq49_vector(q, -w2, -1),
            _eq49_vector(q, w2, -1),
        ]
    )
    if flipped:
        raw = np.diag([-1j, 1j, -1j, 1j]) @ raw
    norms = np.linalg.norm(raw, axis=0)
    scale = max(1.0, abs(q.epsilon), a, g)
    vectors_defined = bool(np.all(norms > 1e-12 * scale**2))
    unit = raw / np.where(norms > 0, norms, 1.0)

    mat = two_mode_matrix(p)
    norm = float(np.linalg.norm(mat, 2))
    tol = 1e-9 * max(1.0, norm)
    pairing = []
    for j in (0, 2):
        if abs(omegas[j + 1] + np.conj(omegas[j])) <= tol and abs(omegas[j].real) > tol / 2:
            pairing.append((j, j + 1))
        else:
            pairing.extend([(j, j), (j + 1, j + 1)])

    notes = []
    defective = set()
    diagonalizable = True
    for grp in cluster(omegas, cluster_tol * max(1.0, norm)):
        if len(grp) == 1:
            continue
        if vectors_defined:
            geo = len(grp) - nullity(unit[:, grp], rank_tol, 1.0)
        else:
            lam = complex(np.mean(omegas[grp]))
            geo = nullity(mat - lam * np.eye(4), rank_tol, max(norm, 1.0))
        if geo < len(grp):
            diagonalizable = False
            defective.update(grp)
    if not vectors_defined:
        notes.append("analytic eigenvectors vanish for these parameters")
    coalescing = tuple(j for j in (0, 1) if 2 * j in defective and 2 * j + 1 in defective)

    p_mat = p_inv = None
    resid = 0.0
    if diagonalizable and vectors_defined:
        p_mat = unit
        p_inv = np.linalg.inv(unit)
        resid = float(np.linalg.norm(p_inv @ mat @ p_mat - np.diag(omegas)) / max(norm, 1e-300))
    return BasicSpectrum(
        omegas=omegas,
        pairing=tuple(sorted(pairing)),
        diagonalizable=diagonalizable,
        p_matrix=p_mat,
        p_inverse=p_inv,
        nilpotent=None if not diagonalizable else np.zeros((4, 4), dtype=complex),
        coalescing=coalescing,
        raw_vectors=raw,
        m_omega=mat,
        phase_flipped=flipped,
        residual=resid,
        notes=tuple(notes),
    )


def closed_form_spectrum(p: TwoModeParams) -> np.ndarray:
    """Just the four analytic eigenfrequencies."""
    return two_mode_closed_form(p).omegas


def transform_noise(s: BasicSpectrum, d: DynamicsMatrix, allow_jordan: bool = False) -> np.ndarray:
    """Langevin correlators in the diagonal basis: ``P^-1 N P^-T``.

    At an exceptional point the eigenvector matrix is singular; this raises
    :class:`SingularTransformError` unless ``allow_jordan`` is set and a
    Jordan basis is available, in which case the correlators are expressed
    in that basis for Jordan-aware propagation.
    """
    if s.p_inverse is None or (not s.diagonalizable and not allow_jordan):
        raise SingularTransformError(
            "eigenvector matrix is singular at an exceptional point; "
            "use the Jordan basis (allow_jordan=True) with Jordan-aware propagation"
        )
    pinv = s.p_inverse
    return pinv @ np.asarray(d.noise_corr) @ pinv.T


def spectrum(system: QuadraticSystem, **kw) -> BasicSpectrum:
    return eigendecompose(build_dynamics_matrix(system), **kw)


def two_mode_dynamics(p: TwoModeParams) -> DynamicsMatrix:
    return build_dynamics_matrix(two_mode_system(p))


def trace_identity_residual(s: BasicSpectrum, m: np.ndarray) -> float:
    return abs(complex(np.sum(s.omegas)) - complex(np.trace(m))) / max(1.0, float(np.linalg.norm(m, 2)))


def is_close_to_surface(p: TwoModeParams, tol: float) -> bool:
    e2 = p.epsilon**2
    a = p.alpha
    return min(abs(e2 - (a - abs(p.g)) ** 2), abs(e2 - (a + abs(p.g)) ** 2)) <= tol or (
        p.g == 0 and abs(e2 - a * a) <= tol
    )


__all__ = [
    "BasicSpectrum",
    "DynamicsMatrix",
    "PairingError",
    "SingularTransformError",
    "build_dynamics_matrix",
    "closed_form_spectrum",
    "commutator_matrix",
    "eigendecompose",
    "pair_eigenvalues",
    "spectrum",
    "transform_noise",
    "two_mode_closed_form",
    "two_mode_dynamics",
    "two_mode_matrix",
]
