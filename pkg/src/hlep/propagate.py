"""Time evolution of moment hierarchies.

A moment state stores, for every order ``p <= P``, the tensor of *ordered*
products ``<x_{i1} ... x_{ip}>`` over the stacked operators (either the
original ``a`` operators or the diagonal ``b`` operators).  With
``dx/dt = -i A x + F`` and delta-correlated forces ``<F_i F_j> = K_ij``,

    d/dt <x_i1 ... x_ip> = -i sum_a A_{i_a j} <... x_j ...>
                           + sum_{a<b} K_{i_a i_b} <product without a, b>

so order p is driven by order p-2, and order 0 is the constant 1.  The whole
block-triangular system is solved with one matrix exponential, which handles
resonant and defective (Jordan) cases without special branches.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.linalg import expm

from .dynamics import BasicSpectrum, DynamicsMatrix, commutator_matrix, transform_noise
from .momentspec import MomentIndex, enumerate_multisets, symbol_key


@dataclass
class MomentState:
    """Ordered moment tensors for orders ``0..max_order``.

    ``tensors[p]`` has shape ``(2M,) * p``; ``tensors[0]`` is the scalar
    normalization (1 for a physical state).  ``basis`` is ``"a"`` or ``"b"``.
    """

    tensors: dict
    num_modes: int
    basis: str = "a"
    t: float = 0.0

    @property
    def max_order(self) -> int:
        return max(self.tensors)

    def value(self, ops) -> complex:
        ops = tuple(ops)
        return complex(self.tensors[len(ops)][ops] if ops else self.tensors[0])

    def canonical(self, p: int) -> dict:
        """Values of the order-p multisets in canonical (mode-wise normal) order."""
        return {idx: self.value(idx.symbols) for idx in enumerate_multisets(self.num_modes, p)}

    def vector(self) -> np.ndarray:
        return np.concatenate([np.ravel(self.tensors[p]) for p in range(self.max_order + 1)])

    def transform(self, mat: np.ndarray, basis: str) -> "MomentState":
        """Apply ``mat`` to every tensor index (``x' = mat x`` for operators)."""
        mat = np.asarray(mat, dtype=complex)
        out = {}
        for p, ten in self.tensors.items():
            ten = np.asarray(ten, dtype=complex)
            for ax in range(p):
                ten = np.moveaxis(np.tensordot(mat, ten, axes=([1], [ax])), 0, ax)
            out[p] = ten
        return MomentState(out, self.num_modes, basis, self.t)

    def to_records(self) -> list[tuple]:
        rows = []
        for p in range(1, self.max_order + 1):
            for idx, v in self.canonical(p).items():
                rows.append((self.t, idx.label(), v.real, v.imag))
        return rows


def state_from_normal_ordered(
    values: dict,
    num_modes: int,
    max_order: int,
    commutator: np.ndarray | None = None,
    basis: str = "a",
) -> MomentState:
    """Build ordered tensors from canonical-order moments.

    Missing multisets are zero, so ``values = {}`` gives the vacuum.  Other
    orderings follow from ``xy = yx + [x, y]``, each swap injecting a
    moment of order two lower.
    """
    c = commutator_matrix(num_modes) if commutator is None else np.asarray(commutator, dtype=complex)
    canon = {}
    for k, v in values.items():
        idx = k if isinstance(k, MomentIndex) else MomentIndex.parse(k, num_modes)
        canon[idx.symbols] = complex(v)

    @lru_cache(maxsize=None)
    def ordered(seq):
        if not seq:
            return complex(canon.get((), 1.0))
        for i in range(len(seq) - 1):
            if symbol_key(seq[i]) > symbol_key(seq[i + 1]):
                swapped = seq[:i] + (seq[i + 1], seq[i]) + seq[i + 2 :]
                rest = seq[:i] + seq[i + 2 :]
                return ordered(swapped) + c[seq[i], seq[i + 1]] * ordered(rest)
        return canon.get(seq, 0j)

    n = 2 * num_modes
    tensors = {0: np.array(ordered(()))}
    for p in range(1, max_order + 1):
        ten = np.zeros((n,) * p, dtype=complex)
        for flat in range(n**p):
            ix = np.unravel_index(flat, (n,) * p)
            ten[ix] = ordered(tuple(int(i) for i in ix))
        tensors[p] = ten
    return MomentState(tensors, num_modes, basis)


def vacuum_state(num_modes: int, max_order: int) -> MomentState:
    return state_from_normal_ordered({}, num_modes, max_order)


# --- hierarchy -------------------------------------------------------------------


def hierarchy_generator(a: np.ndarray, noise: np.ndarray, max_order: int) -> np.ndarray:
    """Generator ``G`` of the stacked ordered moments, ``dv/dt = G v``."""
    a = np.asarray(a, dtype=complex)
    noise = np.asarray(noise, dtype=complex)
    n = a.shape[0]
    sizes = [n**p for p in range(max_order + 1)]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    g = np.zeros((offs[-1], offs[-1]), dtype=complex)
    eye = np.eye(n)
    for p in range(1, max_order + 1):
        blk = np.zeros((sizes[p], sizes[p]), dtype=complex)
        for pos in range(p):
            term = np.ones((1, 1))
            for q in range(p):
                term = np.kron(term, a if q == pos else eye)
            blk += term
        g[offs[p] : offs[p + 1], offs[p] : offs[p + 1]] = -1j * blk
        if p >= 2 and np.any(noise):
            src = np.zeros((sizes[p], sizes[p - 2]), dtype=complex)
            for flat in range(sizes[p]):
                ix = np.unravel_index(flat, (n,) * p)
                for i, j in combinations(range(p), 2):
                    k = noise[ix[i], ix[j]]
                    if k == 0:
                        continue
                    rest = tuple(ix[q] for q in range(p) if q != i and q != j)
                    col = np.ravel_multi_index(rest, (n,) * (p - 2)) if rest else 0
                    src[flat, col] += k
            g[offs[p] : offs[p + 1], offs[p - 2] : offs[p - 1]] = src
    return g


def _unstack(v: np.ndarray, n: int, max_order: int) -> dict:
    out = {}
    pos = 0
    for p in range(max_order + 1):
        size = n**p
        out[p] = v[pos : pos + size].reshape((n,) * p) if p else np.array(v[pos])
        pos += size
    return out


def _evolve(a, noise, init: MomentState, t, basis):
    n = 2 * init.num_modes
    pmax = init.max_order
    g = hierarchy_generator(a, noise, pmax)
    v0 = init.vector()
    if np.ndim(t) == 0:
        v = expm(g * float(t)) @ v0
        return MomentState(_unstack(v, n, pmax), init.num_modes, basis, float(t))
    return [MomentState(_unstack(expm(g * float(tt)) @ v0, n, pmax), init.num_modes, basis, float(tt)) for tt in t]


def propagate_hierarchy(s: BasicSpectrum, k_tilde: np.ndarray, init: MomentState, t):
    """Evolve ordered ``b``-moments up to ``init.max_order``.

    Uses ``diag(Omega) + N`` from ``s`` so the Jordan basis at an EP works
    the same way as the eigenbasis.  ``t`` may be a scalar or a sequence.
    """
    if init.basis != "b":
        raise ValueError("initial state must be in the b basis; use MomentState.transform")
    return _evolve(s.jordan_matrix(), k_tilde, init, t, "b")


def propagate_hierarchy_a(d: DynamicsMatrix, init: MomentState, t):
    """Same hierarchy written directly for the ``a`` operators."""
    if init.basis != "a":
        raise ValueError("initial state must be in the a basis")
    return _evolve(d.m_omega, d.noise_corr, init, t, "a")


def to_b_basis(s: BasicSpectrum, d: DynamicsMatrix, state: MomentState) -> tuple[MomentState, np.ndarray]:
    """Transform an ``a``-basis state; also returns ``K~`` in that basis."""
    if s.p_inverse is None:
        raise ValueError("spectrum carries no transformation matrix")
    k = transform_noise(s, d, allow_jordan=True)
    return state.transform(s.p_inverse, "b"), k


def propagate_first(s: BasicSpectrum, b0, t) -> np.ndarray:
    """``<b>(t) = exp(-i Omega t) b0``; on Jordan chains the generalized
    component adds ``-i t`` times its partner."""
    b0 = np.asarray(b0, dtype=complex)
    om = np.asarray(s.omegas, dtype=complex)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.exp(-1j * np.outer(ts, om)) * b0
    if s.nilpotent is not None and np.any(s.nilpotent):
        nb = s.nilpotent @ b0
        out = out - 1j * ts[:, None] * np.exp(-1j * np.outer(ts, om)) * nb
    elif s.nilpotent is None and s.coalescing:
        out = np.array([expm(-1j * s.jordan_matrix() * tt) @ b0 for tt in ts])
    return out[0] if np.ndim(t) == 0 else out


# --- two-level atom -------------------------------------------------------------


def _c_and_sinc(omega2, t):
    # cos(W t) and sin(W t)/W for W^2 = omega2 (any sign), stable at W -> 0
    z = omega2 * t * t
    if abs(z) < 1e-6:
        c = 1 - z / 2 + z * z / 24
        s = t * (1 - z / 6 + z * z / 120)
    elif z > 0:
        r = np.sqrt(z)
        c, s = np.cos(r), t * np.sin(r) / r
    else:
        r = np.sqrt(-z)
        c, s = np.cosh(r), t * np.sinh(r) / r
    return c, s


def tla_evolution(omega: float, gamma_x: float, init, t) -> np.ndarray:
    """Mean values ``(<s0>, <s+>, <s->, <s1>)`` of the damped two-level atom.

    ``s0 = |0><0|``, ``s+ = |1><0|``, ``s- = |0><1|``, ``s1 = |1><1|``, so the
    order matches the density-matrix basis ``(r00, r01, r10, r11)``.  At
    ``omega = gamma_x`` the oscillating block degenerates to the linear-in-t
    form without special casing.
    """
    s0, sp, sm, s1 = np.asarray(init, dtype=complex)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((len(ts), 4), dtype=complex)
    g = gamma_x
    for k, tt in enumerate(ts):
        e = np.exp(-g * tt)
        ch, sh = np.cosh(g * tt), np.sinh(g * tt)
        c, sinc = _c_and_sinc(omega * omega - g * g, tt)
        out[k, 0] = e * (ch * s0 + sh * s1)
        out[k, 3] = e * (sh * s0 + ch * s1)
        out[k, 1] = e * ((c + 1j * omega * sinc) * sp + g * sinc * sm)
        out[k, 2] = e * (g * sinc * sp + (c - 1j * omega * sinc) * sm)
    return out[0] if np.ndim(t) == 0 else out


# --- frequency content -----------------------------------------------------------


@dataclass(frozen=True)
class FrequencyFit:
    frequencies: np.ndarray
    amplitudes: np.ndarray
    residual: float
    defective: tuple[tuple[complex, int], ...] = ()
    warning: str = ""


def _fit_amplitudes(samples, times, freqs, powers):
    cols = [times**k * np.exp(-1j * lam * times) for lam, k in zip(freqs, powers)]
    basis = np.column_stack(cols) if cols else np.zeros((len(times), 0))
    coef, *_ = np.linalg.lstsq(basis, samples, rcond=None)
    resid = float(np.linalg.norm(basis @ coef - samples) / max(np.linalg.norm(samples), 1e-300))
    return coef, resid


def frequency_content(
    samples,
    dt: float,
    tol: float = 1e-12,
    max_terms: int | None = None,
    merge_tol: float = 1e-4,
) -> FrequencyFit:
    """Fit ``sum_k c_k exp(-i lambda_k t)`` to uniform samples (matrix pencil).

    Poles closer than ``merge_tol`` (relative) are refit as one frequency
    with polynomial prefactors ``t^j``.  A significant ``t`` coefficient marks
    the mode as defective, the time-domain signature of an exceptional point.
    """
    y = np.asarray(samples, dtype=complex)
    n = len(y)
    if n < 64:
        raise ValueError("frequency_content needs at least 64 samples")
    times = dt * np.arange(n)
    pencil = n // 2
    h = np.array([y[i : i + pencil + 1] for i in range(n - pencil)])
    _, sv, vh = np.linalg.svd(h, full_matrices=False)
    if sv[0] == 0:
        return FrequencyFit(np.empty(0, complex), np.empty(0, complex), 0.0, (), "all-zero signal")
    rank = int(np.sum(sv > tol * sv[0]))
    warn = ""
    if max_terms is not None and rank > max_terms:
        rank = max_terms
    # rows of vh span the shift-invariant row space of the Hankel matrix
    v = vh[:rank].T
    v1, v2 = v[:-1], v[1:]
    z = np.linalg.eigvals(np.linalg.pinv(v1) @ v2)
    lam = 1j * np.log(z) / dt

    # merge near-coincident poles
    scale = max(1.0, float(np.abs(lam).max(initial=0.0)))
    groups = []
    for i in np.argsort(lam.real + 1e-3 * lam.imag):
        for grp in groups:
            if abs(lam[i] - np.mean(lam[grp])) <= merge_tol * scale:
                grp.append(i)
                break
        else:
            groups.append([i])
    freqs, powers = [], []
    for grp in groups:
        centre = complex(np.mean(lam[grp]))
        for k in range(len(grp)):
            freqs.append(centre)
            powers.append(k)
    coef, resid = _fit_amplitudes(y, times, freqs, powers)
    if len(groups) < len(lam):
        # compare with the unmerged fit; keep whichever explains the data
        coef_u, resid_u = _fit_amplitudes(y, times, list(lam), [0] * len(lam))
        if resid_u < resid and resid > 10 * tol:
            freqs, powers, coef, resid = list(lam), [0] * len(lam), coef_u, resid_u
            groups = [[i] for i in range(len(lam))]
    defective = []
    out_f, out_a = [], []
    pos = 0
    tmax = times[-1]
    amp_scale = float(np.abs(y).max())
    for grp in groups:
        m = len(grp)
        cs = coef[pos : pos + m]
        out_f.append(freqs[pos])
        out_a.append(cs[0])
        if m > 1 and np.any(np.abs(cs[1:]) * tmax ** np.arange(1, m) > 1e-6 * amp_scale):
            order = 1 + max(k for k in range(1, m) if abs(cs[k]) * tmax**k > 1e-6 * amp_scale)
            defective.append((complex(freqs[pos]), order))
        pos += m
    if rank < len(sv) and rank == 0:
        warn = "rank-deficient fit"
    if resid > 1e-6:
        warn = (warn + "; " if warn else "") + f"fit residual {resid:.2e}"
        warnings.warn(f"frequency_content: {warn}", RuntimeWarning, stacklevel=2)
    order = np.argsort(np.array(out_f).real)
    return FrequencyFit(
        np.array(out_f, dtype=complex)[order],
        np.array(out_a, dtype=complex)[order],
        resid,
        tuple(defective),
        warn,
    )


def trajectory_csv(states: list[MomentState]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "multiset", "re", "im"])
    for st in states:
        for t, label, re, im in st.to_records():
            w.writerow([repr(float(t)), label, repr(float(re)), repr(float(im))])
    return buf.getvalue()
