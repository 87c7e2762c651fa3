"""Exceptional, diabolical and hybrid points of the basic and moment spectra.

Two independent routes are provided and cross-checked:

* matrix level: cluster the eigenvalues of a concrete matrix and measure
  null-space dimensions by SVD (:func:`detect_coalescence`);
* generative: count degeneracies of moment multisets from which basic pairs
  coalesce (:func:`moment_degeneracy_report`).

At an EP a coalescing pair ``(b_j, b_j^dag)`` behaves like a spin-1/2 under
the nilpotent part of the Jordan form.  A moment with ``K`` factors drawn from
coalescing pairs therefore spans ``2^K`` ordered products with
``C(K, floor(K/2))`` eigenvectors, and ``K + 1``-type weight counting applies
to the multiset (reduced) description.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dynamics import DEFAULT_CLUSTER_TOL, DEFAULT_RANK_TOL, BasicSpectrum
from .eigen import cluster, eigvals, nullity
from .model import TwoModeParams
from .momentspec import MomentFrequencyTable, MomentIndex, enumerate_multisets, moment_degeneracy

CLASSIFICATIONS = ("none", "QEP", "QDP", "QHP")


# --- residuals of the EP surfaces ---------------------------------------------


def qep_residuals(p: TwoModeParams) -> tuple[float, float, float]:
    """``(eps^2 - (alpha - g)^2, eps^2 - (alpha + g)^2, eps^2 - kappa^2 - gamma_+^2)``."""
    a = p.alpha
    e2 = p.epsilon**2
    return e2 - (a - p.g) ** 2, e2 - (a + p.g) ** 2, e2 - p.kappa**2 - p.gamma_plus**2


# --- report types ---------------------------------------------------------------


@dataclass(frozen=True)
class ClusterEntry:
    frequency: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    classification: str
    qep_degeneracy: int = 1
    qdp_multiplicity: int = 1
    hidden: bool = False
    provenance: str = "n/a"
    members: tuple = ()
    jordan_blocks: tuple[int, ...] = ()
    symbolic: str = ""
    multisets: tuple[str, ...] = ()
    coalescing_factors: int = 0

    @property
    def cell(self) -> str:
        return f"{self.qdp_multiplicity}x{self.qep_degeneracy}"

    def to_dict(self) -> dict:
        d = {
            "frequency": [float(self.frequency.real), float(self.frequency.imag)],
            "algebraic_multiplicity": self.algebraic_multiplicity,
            "geometric_multiplicity": self.geometric_multiplicity,
            "classification": self.classification,
            "qep_degeneracy": self.qep_degeneracy,
            "qdp_multiplicity": self.qdp_multiplicity,
            "hidden": self.hidden,
            "provenance": self.provenance,
        }
        if self.jordan_blocks:
            d["jordan_blocks"] = list(self.jordan_blocks)
        if self.multisets:
            d["multisets"] = list(self.multisets)
            d["symbolic"] = self.symbolic
        return d


@dataclass(frozen=True)
class DegeneracyReport:
    """Per-cluster multiplicities.

    For moment reports ``classes`` holds one entry per coalescence class (the
    partial QDP x QEP cells) and ``clusters`` merges classes sharing a
    frequency and a number of coalescing factors.
    """

    clusters: tuple[ClusterEntry, ...]
    classes: tuple[ClusterEntry, ...] = ()
    order: int | None = None
    include_redundant: bool = True
    low_confidence: bool = False
    cross_check: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def cluster_at(self, frequency: complex, tol: float = 1e-9) -> list[ClusterEntry]:
        return [c for c in self.clusters if abs(c.frequency - frequency) <= tol]

    def class_of(self, multiset: str | MomentIndex) -> ClusterEntry:
        label = multiset if isinstance(multiset, str) else multiset.label()
        for c in self.classes:
            if label in c.multisets:
                return c
        raise KeyError(label)

    def to_dict(self) -> dict:
        d = {
            "clusters": [c.to_dict() for c in self.clusters],
            "low_confidence": self.low_confidence,
        }
        if self.order is not None:
            d["order"] = self.order
            d["include_redundant"] = self.include_redundant
            d["classes"] = [c.to_dict() for c in self.classes]
        if self.cross_check:
            d["cross_check"] = self.cross_check
        return d


# --- matrix level ----------------------------------------------------------------


def _classify(alg: int, geo: int, blocks: Sequence[int]) -> str:
    if alg == 1:
        return "none"
    if geo == alg:
        return "QDP"
    nontrivial = sum(1 for b in blocks if b >= 2)
    if nontrivial >= 2 or (nontrivial >= 1 and geo > nontrivial):
        return "QHP"
    return "QEP"


def _jordan_blocks(a: np.ndarray, alg: int, tol: float, scale: float) -> tuple[int, ...]:
    # block sizes from the nullities of powers of a = m - lambda I
    d = [0]
    ak = np.eye(len(a), dtype=complex)
    for k in range(1, alg + 1):
        ak = ak @ a
        d.append(min(alg, nullity(ak, tol, scale**k)))
        if d[-1] == alg:
            break
    at_least = [d[k] - d[k - 1] for k in range(1, len(d))] + [0]
    sizes = []
    for k in range(1, len(at_least)):
        sizes += [k] * (at_least[k - 1] - at_least[k])
    if sum(sizes) != alg:
        # inconsistent numerical ranks; fall back to a single defect estimate
        geo = d[1]
        sizes = [1] * max(geo - 1, 0) + [alg - max(geo - 1, 0)]
    return tuple(sorted(sizes, reverse=True))


def detect_coalescence(
    m,
    tol: float = DEFAULT_RANK_TOL,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    values=None,
) -> DegeneracyReport:
    """Cluster eigenvalues of ``m`` and measure their eigenvector counts.

    Parameters
    ----------
    m
        Square complex matrix.
    tol
        Singular values ``<= tol * ||m||`` count as zero.
    cluster_tol
        Single-linkage radius relative to ``max(1, ||m||)``.  It is kept
        larger than ``tol`` because eigenvalues at an EP of order k only
        agree to about ``eps^(1/k)``.
    values
        Precomputed eigenvalues (optional).
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    norm = float(np.linalg.norm(m, 2)) if n else 0.0
    scale = max(1.0, norm)
    radius = cluster_tol * scale
    vals = eigvals(m) if values is None else np.asarray(values, dtype=complex)
    groups = cluster(vals, radius)

    entries = []
    low = False
    centers = []
    for grp in groups:
        lam = complex(np.mean(vals[grp]))
        centers.append(lam)
        alg = len(grp)
        diam = max((abs(vals[i] - vals[j]) for i in grp for j in grp), default=0.0)
        if diam > radius / 10:
            low = True
        a = m - lam * np.eye(n)
        if alg == 1:
            geo, blocks = 1, (1,)
        else:
            geo = max(1, min(alg, nullity(a, tol, scale)))
            blocks = _jordan_blocks(a, alg, tol, scale) if geo < alg else (1,) * alg
        cls = _classify(alg, geo, blocks)
        big = max(blocks)
        entries.append(
            ClusterEntry(
                frequency=lam,
                algebraic_multiplicity=alg,
                geometric_multiplicity=geo,
                classification=cls,
                qep_degeneracy=big,
                qdp_multiplicity=sum(1 for b in blocks if b == big) if big > 1 else alg,
                members=tuple(grp),
                jordan_blocks=blocks,
            )
        )
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) < 10 * radius:
                low = True
    return DegeneracyReport(clusters=tuple(entries), low_confidence=low)


# --- generative counting over moment multisets ----------------------------------------


def _coalescing_groups(s: BasicSpectrum, tol: float) -> list[list[int]]:
    """Coalescing pairs grouped by equal basic frequency."""
    pairs = list(s.coalescing)
    if not pairs:
        return []
    om = np.asarray(s.omegas)
    scale = max(1.0, float(np.abs(om).max()))
    grp = cluster([om[2 * j] for j in pairs], tol * scale)
    return [[pairs[i] for i in g] for g in grp]


def is_hidden(index: MomentIndex, groups: Sequence[Sequence[int]]) -> bool:
    """A multiset is hidden if it holds a creation and an annihilation
    factor from coalescing pairs that share a frequency.  Their
    contributions cancel whether or not the pair coalesces."""
    coef = index.mode_coefficients()
    for g in groups:
        if sum(coef[j][0] for j in g) and sum(coef[j][1] for j in g):
            return True
    return False


def _class_key(index: MomentIndex, coalescing: set[int]):
    coef = index.mode_coefficients()
    return tuple(((n + m),) if j in coalescing else (n, m) for j, (n, m) in enumerate(coef))


def moment_generator(jordan: np.ndarray, p: int, reduced: bool = False) -> tuple[np.ndarray, list]:
    """Homogeneous generator of order-p moments in the diagonal basis.

    ``jordan`` is the basic matrix ``diag(Omega) + N``.  The full generator
    acts on ordered products (a Kronecker sum, dimension ``(2M)^p``); the
    reduced one acts on multisets through symmetric products.  Returns the
    matrix and the basis labels (tuples of symbols).
    """
    j = np.asarray(jordan, dtype=complex)
    n = j.shape[0]
    if not reduced:
        out = np.zeros((n**p, n**p), dtype=complex)
        eye = np.eye(n)
        for pos in range(p):
            term = np.ones((1, 1))
            for q in range(p):
                term = np.kron(term, j if q == pos else eye)
            out += term
        labels = [tuple(int(x) for x in np.unravel_index(k, (n,) * p)) for k in range(n**p)]
        return out, labels
    basis = enumerate_multisets(n // 2, p)
    where = {b.symbols: i for i, b in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, b in enumerate(basis):
        counts = b.counts()
        for sym, c in counts.items():
            for t in np.nonzero(j[:, sym])[0]:
                new = list(b.symbols)
                new.remove(sym)
                new.append(int(t))
                row = where[MomentIndex.of(new, n // 2).symbols]
                out[row, col] += c * j[t, sym]
    return out, [b.symbols for b in basis]


def moment_degeneracy_report(
    s: BasicSpectrum,
    p: int,
    include_redundant: bool = True,
    tol: float = 1e-9,
    cross_check: bool = True,
) -> DegeneracyReport:
    """Degeneracy cells of the order-p moment spectrum at an EP.

    Multisets are grouped into classes by the number ``k_j`` of factors taken
    from each coalescing pair and the exact counts of all other factors.  A
    class has QEP degeneracy ``2^K`` (``K = sum k_j``) and partial QDP
    multiplicity ``p! / (prod k_j! prod n_j! m_j!)``.  Without redundant
    moments every class has QDP multiplicity 1 and its QEP degeneracy is its
    number of multisets.

    With ``cross_check`` the same multiplicities are measured on the
    explicit moment generator and the comparison stored in
    ``report.cross_check``.
    """
    if p < 1:
        raise ValueError("order p must be >= 1")
    om = np.asarray(s.omegas, dtype=complex)
    nmodes = len(om) // 2
    coalescing = set(s.coalescing)
    groups = _coalescing_groups(s, DEFAULT_CLUSTER_TOL)
    scale = max(1.0, float(np.abs(om).max()))

    by_key: dict = defaultdict(list)
    for idx in enumerate_multisets(nmodes, p):
        by_key[_class_key(idx, coalescing)].append(idx)

    classes = []
    for key, members in by_key.items():
        kvec = [key[j][0] for j in sorted(coalescing)]
        big_k = sum(kvec)
        freq = complex(np.mean([sum(om[x] for x in idx.symbols) for idx in members]))
        if include_redundant:
            qep = 2**big_k
            qdp = math.factorial(p)
            for j, part in enumerate(key):
                for c in part:
                    qdp //= math.factorial(c)
            alg = qdp * qep
            geo = qdp * math.comb(big_k, big_k // 2)
        else:
            qdp = 1
            qep = len(members)
            alg = qep
            weights = [
                sum(n - m for j, (n, m) in enumerate(idx.mode_coefficients()) if j in coalescing) for idx in members
            ]
            geo = sum(1 for w in weights if w in (0, 1))
        hidden_members = tuple(i.label() for i in members if is_hidden(i, groups))
        if qep > 1 and qdp > 1:
            cls = "QHP"
        elif qep > 1:
            cls = "QEP"
        elif qdp > 1:
            cls = "QDP"
        else:
            cls = "none"
        classes.append(
            ClusterEntry(
                frequency=freq,
                algebraic_multiplicity=alg,
                geometric_multiplicity=geo,
                classification=cls,
                qep_degeneracy=qep,
                qdp_multiplicity=qdp,
                hidden=bool(hidden_members),
                multisets=tuple(i.label() for i in members),
                symbolic=members[0].label(),
                coalescing_factors=big_k,
            )
        )

    # merge classes with equal frequency and equal number of coalescing factors
    merged = []
    freq_groups = cluster([c.frequency for c in classes], tol * scale)
    for fg in freq_groups:
        by_k: dict = defaultdict(list)
        for i in fg:
            by_k[classes[i].coalescing_factors].append(i)
        for big_k in sorted(by_k):
            idxs = by_k[big_k]
            cs = [classes[i] for i in idxs]
            qep = max(c.qep_degeneracy for c in cs)
            qdp = sum(c.qdp_multiplicity for c in cs)
            if qep > 1 and qdp > 1:
                cls = "QHP"
            elif qep > 1:
                cls = "QEP"
            elif qdp > 1:
                cls = "QDP"
            else:
                cls = "none"
            merged.append(
                ClusterEntry(
                    frequency=complex(np.mean([c.frequency for c in cs])),
                    algebraic_multiplicity=sum(c.algebraic_multiplicity for c in cs),
                    geometric_multiplicity=sum(c.geometric_multiplicity for c in cs),
                    classification=cls,
                    qep_degeneracy=qep,
                    qdp_multiplicity=qdp,
                    hidden=any(c.hidden for c in cs),
                    members=tuple(idxs),
                    multisets=tuple(x for c in cs for x in c.multisets),
                    coalescing_factors=big_k,
                )
            )

    check = {}
    if cross_check:
        check = _cross_check(s, p, include_redundant, classes, freq_groups, scale, tol)
    return DegeneracyReport(
        clusters=tuple(merged),
        classes=tuple(classes),
        order=p,
        include_redundant=include_redundant,
        cross_check=check,
    )


def _cross_check(s, p, include_redundant, classes, freq_groups, scale, tol) -> dict:
    n = 2 * s.num_modes
    if include_redundant and n**p > 4096:
        return {"checked": False, "reason": "generator too large"}
    gen, _ = moment_generator(s.jordan_matrix(), p, reduced=not include_redundant)
    diag = np.diag(gen)
    gscale = max(1.0, float(np.linalg.norm(gen, 2)))
    mismatches = []
    for fg in freq_groups:
        lam = complex(np.mean([classes[i].frequency for i in fg]))
        alg = int(np.sum(np.abs(diag - lam) <= tol * scale * p))
        geo = nullity(gen - lam * np.eye(len(gen)), DEFAULT_RANK_TOL, gscale)
        want_alg = sum(classes[i].algebraic_multiplicity for i in fg)
        want_geo = sum(classes[i].geometric_multiplicity for i in fg)
        if (alg, geo) != (want_alg, want_geo):
            mismatches.append(
                {"frequency": [lam.real, lam.imag], "matrix": [alg, geo], "combinatorial": [want_alg, want_geo]}
            )
    return {"checked": True, "agree": not mismatches, "mismatches": mismatches}


def hidden_qep_scan(table: MomentFrequencyTable, s: BasicSpectrum) -> list:
    """Rows whose frequency contains a canceling contribution from a
    coalescing pair.  Such rows show no spectral bifurcation at the EP even
    though their eigenvector count drops."""
    groups = _coalescing_groups(s, DEFAULT_CLUSTER_TOL)
    return [row for row in table.rows if is_hidden(row.index, groups)]


# --- hybrid-point provenance ------------------------------------------------------------


def inherited_groups(s: BasicSpectrum) -> list[list[int]]:
    """Groups of two or more coalescing pairs sharing a basic frequency."""
    return [g for g in _coalescing_groups(s, DEFAULT_CLUSTER_TOL) if len(g) > 1]


def classify_qhp_provenance(
    full: Sequence[DegeneracyReport],
    reduced: Sequence[DegeneracyReport],
    balanced: bool,
    s: BasicSpectrum,
    tol: float = 1e-9,
) -> list[DegeneracyReport]:
    """Attach provenance labels to the clusters of reports for orders 1..P.

    ``inherited``: the cluster draws coalescing factors from basic pairs that
    are already degenerate with each other.  ``genuine``: with balanced gain
    and loss, the same QEP frequency recurs at a different order.
    ``induced``: QDP multiplicity above one that drops to one once redundant
    moments are removed.  Precedence follows that order.
    """
    if len(full) != len(reduced):
        raise ValueError("full and reduced reports must cover the same orders")
    inherited = bool(inherited_groups(s))
    scale = max(1.0, float(np.abs(np.asarray(s.omegas)).max()))
    qep_freqs = [(r.order, c.frequency) for r in full for c in r.clusters if c.qep_degeneracy > 1]
    out = []
    for rf, rr in zip(full, reduced):
        labelled = []
        for c in rf.clusters:
            label = "n/a"
            if c.qep_degeneracy > 1:
                if inherited and c.coalescing_factors > 0 and c.qdp_multiplicity > 1:
                    label = "inherited"
                elif balanced and any(
                    o != rf.order and abs(f - c.frequency) <= tol * scale for o, f in qep_freqs
                ):
                    label = "genuine"
                elif c.qdp_multiplicity > 1:
                    twins = [
                        d
                        for d in rr.clusters
                        if abs(d.frequency - c.frequency) <= tol * scale
                        and d.coalescing_factors == c.coalescing_factors
                    ]
                    if twins and all(d.qdp_multiplicity == 1 for d in twins):
                        label = "induced"
            labelled.append(replace(c, provenance=label))
        classes = []
        for c in rf.classes:
            owner = next(
                (d for d in labelled if any(m in d.multisets for m in c.multisets)),
                None,
            )
            classes.append(replace(c, provenance=owner.provenance if owner and c.qep_degeneracy > 1 else "n/a"))
        out.append(replace(rf, clusters=tuple(labelled), classes=tuple(classes)))
    return out


# --- surface sweep ------------------------------------------------------------------


@dataclass(frozen=True)
class SurfacePoint:
    gamma_plus_over_eps: float
    kappa_over_eps: float
    g_over_eps: float
    branch: str
    residual: float


SURFACE_COLUMNS = ("gamma_plus_over_eps", "kappa_over_eps", "g_over_eps", "branch", "residual")


def _axis(r) -> np.ndarray:
    if isinstance(r, np.ndarray):
        return r.astype(float)
    lo, hi, n = r
    n = int(n)
    if n < 2 or not hi > lo:
        raise ValueError(f"grid range needs hi > lo and n >= 2, got {r!r}")
    ax = np.linspace(lo, hi, n)
    if np.isclose(lo, -hi):
        # exactly mirror-symmetric samples
        ax = (ax - ax[::-1]) / 2
    return ax


def _bisect(f, lo, hi, iters=80):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _roots_along(f, axis, *fixed):
    """Sign changes of ``f(x, *fixed)`` along ``axis`` refined by bisection.

    ``fixed`` are broadcastable arrays (leading dims); returns
    ``(index tuple of fixed, root)``.
    """
    vals = f(axis, *[x[..., None] for x in fixed])
    s = np.sign(vals)
    hits = np.argwhere(s[..., :-1] * s[..., 1:] < 0)
    exact = np.argwhere(s == 0)
    out_idx = [tuple(h[:-1]) for h in hits] + [tuple(e[:-1]) for e in exact]
    if len(hits):
        lo = axis[hits[:, -1]]
        hi = axis[hits[:, -1] + 1]
        fx = [x[tuple(hits[:, :-1].T)] for x in fixed]
        roots = _bisect(lambda t: f(t, *fx), lo, hi)
    else:
        roots = np.empty(0)
    roots = np.concatenate([roots, axis[exact[:, -1]] if len(exact) else np.empty(0)])
    return out_idx, roots


def _alpha(gp, kap):
    return np.hypot(kap, gp)


def _r_minus(g, gp, kap):
    return 1.0 - (_alpha(gp, kap) - g) ** 2


def _r_plus(g, gp, kap):
    return 1.0 - (_alpha(gp, kap) + g) ** 2


def _r_circle_k(k, gp):
    return 1.0 - k * k - gp * gp


def _r_circle_gp(gp, k):
    return 1.0 - k * k - gp * gp


def _sweep_chunk(gp_axis, k_axis, g_axis, tol):
    pts = []
    gp_grid, k_grid = np.meshgrid(gp_axis, k_axis, indexing="ij")
    for branch, f in (("minus", _r_minus), ("plus", _r_plus)):
        idx, roots = _roots_along(f, g_axis, gp_grid, k_grid)
        for (i, j), g in zip(idx, roots):
            gp, kap = gp_axis[i], k_axis[j]
            pts.append((gp, kap, float(g), branch, abs(float(f(g, gp, kap)))))
    return pts


def sweep_surface(
    gamma_plus_range,
    kappa_range,
    g_range,
    tol: float = 1e-10,
    jobs: int = 1,
) -> list[SurfacePoint]:
    """Sample the EP surfaces in units of ``epsilon``.

    Each range is ``(lo, hi, n)`` or an explicit array.  Roots of the two
    cone residuals are located by sign changes along the ``g`` axis and
    refined by bisection; the ``g = 0`` circle is sampled along both the
    ``kappa`` and ``gamma_+`` axes.  Points whose residual exceeds ``tol``
    are discarded.  Output order is deterministic for any ``jobs``.
    """
    gp_axis = _axis(gamma_plus_range)
    k_axis = _axis(kappa_range)
    g_axis = _axis(g_range)
    if not (gp_axis.size and k_axis.size and g_axis.size):
        raise ValueError("empty grid")
    chunks = np.array_split(gp_axis, max(1, min(jobs, gp_axis.size)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_sweep_chunk, chunks, [k_axis] * len(chunks), [g_axis] * len(chunks), [tol] * len(chunks)))
    else:
        parts = [_sweep_chunk(c, k_axis, g_axis, tol) for c in chunks]
    raw = [p for part in parts for p in part]

    idx, roots = _roots_along(_r_circle_k, k_axis, gp_axis)
    for (i,), k in zip(idx, roots):
        raw.append((gp_axis[i], float(k), 0.0, "circle", abs(float(_r_circle_k(k, gp_axis[i])))))
    idx, roots = _roots_along(_r_circle_gp, gp_axis, k_axis)
    for (j,), gp in zip(idx, roots):
        raw.append((float(gp), k_axis[j], 0.0, "circle", abs(float(_r_circle_gp(gp, k_axis[j])))))

    order = {"minus": 0, "plus": 1, "circle": 2}
    raw.sort(key=lambda x: (order[x[3]], x[0], x[1], x[2]))
    return [SurfacePoint(float(a), float(b), float(c), br, float(r)) for a, b, c, br, r in raw if r <= tol]
