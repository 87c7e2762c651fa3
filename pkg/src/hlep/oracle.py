"""Truncated Lindblad Liouvillians as an independent reference.

Density matrices are vectorized by column stacking, ``vec(A X B) =
(B^T kron A) vec(X)``, so the generator is

    -i (I kron H - H^T kron I)
      + sum_k g_k [conj(L_k) kron L_k - (I kron L_k^dag L_k + (L_k^dag L_k)^T kron I) / 2].

Damped modes use ``L = a`` and amplified modes ``L = a^dag``, each at the
mode's rate.  Nothing here reuses the dynamics-matrix code.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import QuadraticSystem

DENSE_LIMIT = 1024
DEFAULT_MAX_SUPEROP_DIM = 4096


class OracleError(ValueError):
    """Oracle request outside its supported domain."""


class DimensionCapError(OracleError):
    """Truncated space exceeds the configured dimension cap."""


class OracleConvergenceError(RuntimeError):
    def __init__(self, message, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


# --- two-level atom ----------------------------------------------------------------


def build_tla_liouvillian(omega: float, gamma_x: float) -> np.ndarray:
    """``-i M`` for the sigma_x-damped atom in the basis (r00, r01, r10, r11)."""
    if gamma_x < 0:
        raise OracleError("gamma_x must be nonnegative")
    w, g = omega, gamma_x
    m = np.array(
        [
            [-1j * g, 0, 0, 1j * g],
            [0, -w - 1j * g, 1j * g, 0],
            [0, 1j * g, w - 1j * g, 0],
            [1j * g, 0, 0, -1j * g],
        ],
        dtype=complex,
    )
    return -1j * m


def tla_eigenfrequencies(omega: float, gamma_x: float) -> np.ndarray:
    """``{0, +-sqrt(w^2 - g^2) - i g, -2 i g}``."""
    root = complex(np.sqrt(complex(omega * omega - gamma_x * gamma_x)))
    return np.array([0, root - 1j * gamma_x, -root - 1j * gamma_x, -2j * gamma_x], dtype=complex)


# --- generic Lindblad superoperators -----------------------------------------------


def lindblad_superoperator(h, jumps=()) -> sp.csr_matrix:
    """Column-stacked generator for Hamiltonian ``h`` and ``(rate, L)`` jumps."""
    h = sp.csr_matrix(h, dtype=complex)
    d = h.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    out = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for rate, op in jumps:
        if rate == 0:
            continue
        op = sp.csr_matrix(op, dtype=complex)
        ldl = (op.conj().T @ op).tocsr()
        out = out + rate * (sp.kron(op.conj(), op) - 0.5 * (sp.kron(eye, ldl) + sp.kron(ldl.T, eye)))
    return out.tocsr()


def tla_lindblad(omega: float, gamma_x: float) -> np.ndarray:
    """The atom built from ``H = diag(-w/2, w/2)`` and ``L = sigma_x``,
    reordered to (r00, r01, r10, r11)."""
    h = np.diag([-omega / 2, omega / 2])
    sx = np.array([[0, 1], [1, 0]])
    lv = lindblad_superoperator(h, [(gamma_x, sx)]).toarray()
    # column stacking order is (r00, r10, r01, r11)
    perm = [0, 2, 1, 3]
    return lv[np.ix_(perm, perm)]


def annihilation(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, shape=(n, n), format="csr", dtype=complex)


def mode_operators(cutoffs) -> list[sp.csr_matrix]:
    cutoffs = [int(c) for c in cutoffs]
    ops = []
    for j, n in enumerate(cutoffs):
        term = sp.identity(1, dtype=complex, format="csr")
        for k, nk in enumerate(cutoffs):
            term = sp.kron(term, annihilation(nk) if k == j else sp.identity(nk, dtype=complex), format="csr")
        ops.append(term)
    return ops


@dataclass
class TruncatedLiouvillian:
    superop: sp.csr_matrix
    cutoffs: tuple[int, ...]
    hermiticity_map: np.ndarray
    system: QuadraticSystem | None = None
    flags: tuple[str, ...] = ()
    annihilators: list = field(default_factory=list, repr=False)

    @property
    def hilbert_dim(self) -> int:
        return int(np.prod(self.cutoffs))

    @property
    def dim(self) -> int:
        return self.superop.shape[0]

    def trace_row(self) -> np.ndarray:
        d = self.hilbert_dim
        row = np.zeros(d * d)
        row[np.arange(d) * (d + 1)] = 1.0
        return row


def hermiticity_permutation(d: int) -> np.ndarray:
    idx = np.arange(d * d)
    i, j = idx % d, idx // d
    return j + i * d


def build_fock_liouvillian(
    system: QuadraticSystem,
    cutoffs,
    max_superop_dim: int = DEFAULT_MAX_SUPEROP_DIM,
    allow_amplified: bool = False,
) -> TruncatedLiouvillian:
    """Generator of the master equation on truncated Fock spaces.

    ``max_superop_dim`` caps the superoperator dimension ``D^2`` where
    ``D`` is the product of the cutoffs.  Systems that are not net damped
    require ``allow_amplified``; their truncated spectra need not reflect the
    unbounded generator.
    """
    cutoffs = tuple(int(c) for c in np.broadcast_to(cutoffs, (system.num_modes,)))
    if any(c < 1 for c in cutoffs):
        raise OracleError("cutoffs must be positive")
    d = int(np.prod(cutoffs))
    if d * d > max_superop_dim:
        raise DimensionCapError(f"superoperator dimension {d * d} exceeds cap {max_superop_dim}")
    flags = []
    total_d = float(system.damping.sum())
    for r in system.rates:
        if r.kind == "amplified" and r.rate > 0 and r.rate >= total_d:
            flags.append("amplification-dominates")
            break
    if not system.is_net_damped():
        if not allow_amplified:
            raise OracleError("system is not net damped; pass allow_amplified to override")
        flags.append("not-net-damped")

    a = mode_operators(cutoffs)
    eps = np.asarray(system.epsilon)
    kap = np.asarray(system.kappa)
    h = sp.csr_matrix((d, d), dtype=complex)
    for j in range(system.num_modes):
        for k in range(system.num_modes):
            if eps[j, k] != 0:
                h = h + eps[j, k] * (a[j].conj().T @ a[k])
            if kap[j, k] != 0:
                pair = a[j] @ a[k]
                h = h + kap[j, k] * pair + np.conj(kap[j, k]) * pair.conj().T
    jumps = []
    for j, r in enumerate(system.rates):
        op = a[j] if r.kind == "damped" else a[j].conj().T
        jumps.append((r.rate, op))
    lv = lindblad_superoperator(h, jumps)
    return TruncatedLiouvillian(lv, cutoffs, hermiticity_permutation(d), system, tuple(flags), a)


# --- spectra -------------------------------------------------------------------


def _sort_slowest(vals: np.ndarray) -> np.ndarray:
    vals = np.asarray(vals, dtype=complex)
    key = np.lexsort((np.round(np.abs(vals.imag), 12), np.round(np.abs(vals.real), 12)))
    return vals[key]


def liouvillian_spectrum(
    lv: TruncatedLiouvillian | np.ndarray | sp.spmatrix,
    k: int,
    shift: float = 1e-3,
    extra: int = 30,
    tol: float = 0.0,
) -> np.ndarray:
    """The ``k`` eigenvalues with smallest ``|Re|`` (ties by ``|Im|``).

    Dense below dimension 1024; above that, shift-invert Arnoldi around a
    small positive real shift (the generator itself is singular) returning
    ``k + extra`` candidates before sorting.
    """
    mat = lv.superop if isinstance(lv, TruncatedLiouvillian) else lv
    n = mat.shape[0]
    if k > n:
        raise ValueError(f"k = {k} exceeds dimension {n}")
    if n < DENSE_LIMIT:
        dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat, dtype=complex)
        return _sort_slowest(np.linalg.eigvals(dense))[:k]
    nev = min(n - 2, k + extra)
    try:
        vals = spla.eigs(sp.csc_matrix(mat, dtype=complex), k=nev, sigma=shift, which="LM", tol=tol, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise OracleConvergenceError(
            "shift-invert Arnoldi did not converge", eigenvalues=exc.eigenvalues
        ) from exc
    return _sort_slowest(vals)[:k]


@dataclass(frozen=True)
class ConvergedSpectrum:
    eigenvalues: np.ndarray
    converged: np.ndarray
    cutoffs: tuple
    movement: np.ndarray


def converged_spectrum(
    system: QuadraticSystem,
    cutoff: int,
    k: int,
    tol: float,
    step: int = 4,
    max_superop_dim: int = DEFAULT_MAX_SUPEROP_DIM,
    allow_amplified: bool = False,
) -> ConvergedSpectrum:
    """Slowest ``k`` eigenvalues at ``cutoff + step`` with a convergence flag:
    each must lie within ``tol / 10`` of an eigenvalue at ``cutoff``."""
    lo = liouvillian_spectrum(build_fock_liouvillian(system, cutoff, max_superop_dim, allow_amplified), k + 10)
    hi = liouvillian_spectrum(build_fock_liouvillian(system, cutoff + step, max_superop_dim, allow_amplified), k)
    move = np.array([np.min(np.abs(lo - v)) for v in hi])
    return ConvergedSpectrum(hi, move < tol / 10, (cutoff, cutoff + step), move)


# --- comparison with moment predictions -----------------------------------------------


@dataclass(frozen=True)
class MatchReport:
    matched: tuple[tuple[int, int, float], ...]
    unmatched_predicted: tuple[int, ...]
    unmatched_oracle: tuple[tuple[int, str], ...]
    max_deviation: float
    predicted: np.ndarray
    oracle: np.ndarray

    @property
    def all_predicted_matched(self) -> bool:
        return not self.unmatched_predicted

    def to_dict(self) -> dict:
        return {
            "matched": [[i, j, d] for i, j, d in self.matched],
            "unmatched_predicted": list(self.unmatched_predicted),
            "unmatched_oracle": [[j, why] for j, why in self.unmatched_oracle],
            "max_deviation": self.max_deviation,
        }


def predicted_eigenvalues(tables, include_zero: bool = True) -> np.ndarray:
    """``-i * frequency`` over the rows of moment tables (plus 0)."""
    vals = [0j] if include_zero else []
    for t in tables:
        vals += [-1j * complex(f) for f in t.frequencies()]
    return np.array(vals, dtype=complex)


def compare_spectra(predicted, oracle_vals, tol: float) -> MatchReport:
    """Greedy bipartite matching of predicted to oracle eigenvalues.

    ``predicted`` is a list of moment tables or an array of eigenvalues
    (already multiplied by ``-i``).  Unmatched oracle values decaying faster
    than every prediction are labelled ``beyond-order``.
    """
    if isinstance(predicted, (list, tuple)) and predicted and hasattr(predicted[0], "frequencies"):
        pred = predicted_eigenvalues(predicted)
    else:
        pred = np.asarray(predicted, dtype=complex)
    orc = np.asarray(oracle_vals, dtype=complex)
    dist = np.abs(pred[:, None] - orc[None, :])
    order = np.argsort(dist, axis=None, kind="stable")
    used_p, used_o = set(), set()
    matched = []
    for flat in order:
        i, j = divmod(int(flat), len(orc))
        if dist[i, j] > tol:
            break
        if i in used_p or j in used_o:
            continue
        used_p.add(i)
        used_o.add(j)
        matched.append((i, j, float(dist[i, j])))
    floor = float(pred.real.min()) if len(pred) else 0.0
    un_o = tuple(
        (j, "beyond-order" if orc[j].real < floor - tol else "unexpected") for j in range(len(orc)) if j not in used_o
    )
    return MatchReport(
        matched=tuple(sorted(matched)),
        unmatched_predicted=tuple(i for i in range(len(pred)) if i not in used_p),
        unmatched_oracle=un_o,
        max_deviation=max((m[2] for m in matched), default=0.0),
        predicted=pred,
        oracle=orc,
    )


# --- stationary state and moments --------------------------------------------------------


@dataclass(frozen=True)
class StationaryState:
    rho: np.ndarray | None
    kernel: np.ndarray
    degenerate: bool
    hermitian_residual: float = float("nan")
    min_eigenvalue: float = float("nan")


def stationary_state(lv: TruncatedLiouvillian, tol: float = 1e-9) -> StationaryState:
    """Unit-trace kernel vector of the generator.

    A degenerate kernel is returned as is, without choosing a normalization.
    """
    d = lv.hilbert_dim
    mat = lv.superop
    n = mat.shape[0]
    scale = max(1.0, float(spla.norm(mat, 1)))
    if n < DENSE_LIMIT:
        _, s, vh = np.linalg.svd(mat.toarray())
        kern = vh[s <= tol * scale].conj().T
    else:
        vals, vecs = spla.eigs(sp.csc_matrix(mat), k=4, sigma=1e-3 * scale, which="LM")
        kern = vecs[:, np.abs(vals) <= tol * scale]
    if kern.shape[1] != 1:
        if kern.shape[1] > 1:
            warnings.warn("stationary kernel is degenerate", RuntimeWarning, stacklevel=2)
        return StationaryState(None, kern, kern.shape[1] > 1)
    v = kern[:, 0]
    tr = lv.trace_row() @ v
    rho = (v / tr).reshape((d, d), order="F")
    herm = float(np.abs(rho - rho.conj().T).max())
    mineig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    return StationaryState(rho, kern, False, herm, mineig)


def expectation(lv: TruncatedLiouvillian, rho: np.ndarray, op) -> complex:
    op = op.toarray() if sp.issparse(op) else np.asarray(op)
    return complex(np.trace(op @ rho))


def evolve_density(lv: TruncatedLiouvillian, rho0: np.ndarray, times) -> list[np.ndarray]:
    """``rho(t)`` for each time via sparse exponential actions."""
    d = lv.hilbert_dim
    v0 = np.asarray(rho0, dtype=complex).reshape(-1, order="F")
    times = np.asarray(times, dtype=float)
    out = []
    prev_t, v = 0.0, v0
    for t in times:
        v = spla.expm_multiply(lv.superop * (t - prev_t), v)
        prev_t = t
        out.append(v.reshape((d, d), order="F"))
    return out


def stacked_operators(lv: TruncatedLiouvillian) -> list:
    """Truncated ``(a_1, a_1^dag, ..., a_M, a_M^dag)``."""
    ops = []
    for a in lv.annihilators:
        ops += [a, a.conj().T.tocsr()]
    return ops


def moment_rates(lv: TruncatedLiouvillian, rho: np.ndarray, ops) -> complex:
    """``Tr{X L[rho]}`` for the product of ``ops`` (in order)."""
    d = lv.hilbert_dim
    drho = (lv.superop @ np.asarray(rho, dtype=complex).reshape(-1, order="F")).reshape((d, d), order="F")
    x = sp.identity(d, dtype=complex, format="csr")
    for o in ops:
        x = x @ o
    return complex(np.trace(x.toarray() @ drho))


def oracle_report(system: QuadraticSystem, conv: ConvergedSpectrum, match: MatchReport) -> dict:
    return {
        "params": system.to_dict(),
        "cutoffs": list(conv.cutoffs),
        "eigenvalues": [[float(v.real), float(v.imag)] for v in conv.eigenvalues],
        "converged": [bool(c) for c in conv.converged],
        "match": match.to_dict(),
    }
