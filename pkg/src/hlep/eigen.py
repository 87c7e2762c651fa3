"""Dense complex eigensolver and rank utilities.

The solver is a textbook pipeline: Householder reduction to upper Hessenberg
form followed by implicit single-shift QR sweeps (Wilkinson shifts, Givens
rotations, exceptional shifts on stagnation).  Matrices here are tiny, so
clarity wins over blocking.
"""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps
SMLNUM = np.finfo(float).tiny / np.finfo(float).eps


class ConvergenceError(RuntimeError):
    """QR iteration failed to deflate an eigenvalue."""


def hessenberg(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(H, Q)`` with ``Q^H a Q = H`` upper Hessenberg, ``Q`` unitary."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1 :, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0 or np.linalg.norm(x[1:]) == 0.0:
            continue
        # work on the unit vector so subnormal entries cannot overflow the phase
        v = x / alpha
        phase = v[0] / abs(v[0]) if abs(v[0]) > 0.0 else 1.0
        v[0] += phase
        v /= np.linalg.norm(v)
        # H <- (I - 2 v v^H) H (I - 2 v v^H)
        h[k + 1 :, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, :])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v.conj())
        h[k + 2 :, k] = 0.0
    return h, q


def _givens(x: complex, y: complex) -> tuple[float, complex]:
    # G = [[c, s], [-conj(s), c]] maps (x, y) to (r, 0)
    if y == 0:
        return 1.0, 0j
    if x == 0:
        return 0.0, np.conj(y) / abs(y)
    scale = max(abs(x), abs(y))
    x, y = x / scale, y / scale
    ax = abs(x)
    if ax == 0.0:
        return 0.0, np.conj(y) / abs(y)
    nrm = np.hypot(ax, abs(y))
    return ax / nrm, (x / ax) * np.conj(y) / nrm


def _wilkinson(a, b, c, d) -> complex:
    # eigenvalue of [[a, b], [c, d]] closer to d
    half = (a - d) / 2
    disc = np.sqrt(half * half + b * c)
    mu1 = (a + d) / 2 + disc
    mu2 = (a + d) / 2 - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def schur(a: np.ndarray, max_iter_per_eig: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur decomposition ``a = Z T Z^H`` with ``T`` upper triangular."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if n == 0:
        return a.copy(), np.eye(0, dtype=complex)
    # scale to unit size and flush entries that would only produce subnormals
    scale = np.abs(a).max()
    if scale == 0.0:
        return a.copy(), np.eye(n, dtype=complex)
    a = a / scale
    a[np.abs(a) < SMLNUM] = 0.0
    h, z = hessenberg(a)
    norm = max(np.abs(h).max(), SMLNUM)

    hi = n - 1
    its = 0
    total = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if s == 0.0:
                s = norm
            if abs(h[lo, lo - 1]) <= max(EPS * s, SMLNUM * n):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if its > max_iter_per_eig:
            raise ConvergenceError(f"QR iteration did not converge at index {hi} after {its} sweeps")

        if its % 11 == 0:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1]) * (1 + 1j)
        else:
            mu = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])

        x = h[lo, lo] - mu
        y = h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            c, s = _givens(x, y)
            g = np.array([[c, s], [-np.conj(s), c]])
            col0 = max(k - 1, 0)
            h[k : k + 2, col0:] = g @ h[k : k + 2, col0:]
            row1 = min(k + 3, n)
            h[:row1, k : k + 2] = h[:row1, k : k + 2] @ g.conj().T
            z[:, k : k + 2] = z[:, k : k + 2] @ g.conj().T
            if k > lo:
                h[k + 1, k - 1] = 0.0
    return scale * np.triu(h), z


def eigvals(a: np.ndarray) -> np.ndarray:
    """Eigenvalues via :func:`schur`; triangular input is read off directly."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 2 and a.shape[0] == a.shape[1] and not np.any(np.tril(a, -1)):
        return np.diag(a).copy()
    t, _ = schur(a)
    return np.diag(t).copy()


def cluster(values, radius: float) -> list[list[int]]:
    """Single-linkage clusters of complex values; indices sorted within groups.

    Groups are ordered by their smallest member index.
    """
    values = np.asarray(values, dtype=complex)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def null_space(a: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space.

    Singular values ``<= tol * sigma_max`` count as zero.  ``sigma_max`` is
    taken as 1 for the zero matrix.
    """
    a = np.asarray(a, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * smax))
    return vh[rank:].conj().T


def nullity(a: np.ndarray, tol: float, scale: float | None = None) -> int:
    """Dimension of the numerical null space of ``a``.

    The threshold is ``tol * scale``; ``scale`` defaults to the largest
    singular value of ``a``.
    """
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if scale is None:
        scale = s[0] if s.size and s[0] > 0 else 1.0
    return int(np.sum(s <= tol * scale))
