"""Moment multisets and the frequency tables of p-th order moments.

Symbols ``0 .. 2M-1`` follow the stacked slot order of :class:`BasicSpectrum`:
symbol ``2j`` is ``b_{j+1}`` (frequency ``omegas[2j]``) and ``2j+1`` is
``b_{j+1}^dag`` (frequency ``omegas[2j+1]``).  Mean values of products that
differ only in operator order share a frequency, so one row per multiset is
enough; the number of orderings is the row's moment degeneracy.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np


def symbol_key(s: int) -> tuple[int, int]:
    # by mode, creation before annihilation
    return s // 2, 1 - s % 2


def symbol_label(s: int) -> str:
    return f"b{s // 2 + 1}" + ("^dag" if s % 2 else "")


@dataclass(frozen=True, order=True)
class MomentIndex:
    """A multiset of mode operators in canonical order."""

    symbols: tuple[int, ...]
    num_modes: int

    @classmethod
    def of(cls, symbols, num_modes: int) -> "MomentIndex":
        symbols = tuple(int(s) for s in symbols)
        for s in symbols:
            if not 0 <= s < 2 * num_modes:
                raise ValueError(f"symbol {s} out of range for {num_modes} modes")
        return cls(tuple(sorted(symbols, key=symbol_key)), num_modes)

    @classmethod
    def parse(cls, text: str, num_modes: int) -> "MomentIndex":
        """Parse labels like ``"b1^dag b1 b2^2"`` or ``"b1^dag2 b2"``."""
        out = []
        for tok in text.split():
            name, _, power = tok.partition("^")
            if not name.startswith("b") or not name[1:].isdigit():
                raise ValueError(f"bad operator token {tok!r}")
            mode = int(name[1:]) - 1
            dag = power.startswith("dag")
            rest = power[3:] if dag else power
            n = int(rest) if rest else 1
            out += [2 * mode + (1 if dag else 0)] * n
        return cls.of(out, num_modes)

    @property
    def order(self) -> int:
        return len(self.symbols)

    def counts(self) -> Counter:
        return Counter(self.symbols)

    def mode_coefficients(self) -> tuple[tuple[int, int], ...]:
        """Per mode ``(n_j, m_j)``: annihilation and creation factor counts."""
        c = self.counts()
        return tuple((c[2 * j], c[2 * j + 1]) for j in range(self.num_modes))

    def dagger(self) -> "MomentIndex":
        return MomentIndex.of([s ^ 1 for s in self.symbols], self.num_modes)

    def label(self) -> str:
        parts = []
        c = self.counts()
        for s in sorted(c, key=symbol_key):
            base = symbol_label(s)
            parts.append(base if c[s] == 1 else (f"{base}{c[s]}" if s % 2 else f"{base}^{c[s]}"))
        return " ".join(parts)

    def __str__(self) -> str:
        return self.label()


def moment_degeneracy(m: MomentIndex) -> int:
    """Number of distinct operator orderings, ``p! / prod(mult!)``."""
    out = math.factorial(m.order)
    for k in m.counts().values():
        out //= math.factorial(k)
    return out


def count_frequencies(num_modes: int, p: int) -> int:
    """Number of independent p-th order moments (and thus frequencies).

    Uses the closed formulas for ``p <= 4`` and the multiset count
    ``C(2M + p - 1, p)`` beyond.
    """
    if num_modes < 1 or p < 0:
        raise ValueError("need num_modes >= 1 and p >= 0")
    n = 2 * num_modes
    c = math.comb
    closed = {
        0: 1,
        1: n,
        2: n + c(n, 2),
        3: n + 2 * c(n, 2) + c(n, 3),
        4: n + 3 * c(n, 2) + 3 * c(n, 3) + c(n, 4),
    }
    return closed[p] if p in closed else c(n + p - 1, p)


def enumerate_multisets(num_modes: int, p: int) -> list[MomentIndex]:
    ordered = sorted(range(2 * num_modes), key=symbol_key)
    return [MomentIndex(tuple(comb), num_modes) for comb in combinations_with_replacement(ordered, p)]


def _term(coef: int, name: str) -> str:
    return name if coef == 1 else f"{coef}{name}"


def symbolic_frequency(coeffs, order: int, common_imag: bool = True) -> str:
    """Signed combination string, e.g. ``"Ω2r + Ω1r - Ω1r, 3Ωi"``.

    Canceling contributions are kept, so ``b1^dag b1`` reads ``Ω1r - Ω1r``.
    """
    terms = []
    for j, (n, m) in enumerate(coeffs, start=1):
        if n:
            terms.append(("+", _term(n, f"Ω{j}r")))
        if m:
            terms.append(("-", _term(m, f"Ω{j}r")))
    if not terms:
        real = "0"
    else:
        real = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        real += "".join(f" {sign} {t}" for sign, t in terms[1:])
    if common_imag:
        imag = _term(order, "Ωi") if order else "0"
    else:
        imag = " + ".join(_term(n + m, f"Ω{j}i") for j, (n, m) in enumerate(coeffs, start=1) if n + m) or "0"
    return f"{real}, {imag}"


@dataclass(frozen=True)
class MomentRow:
    index: MomentIndex
    frequency: complex
    moment_degeneracy: int
    symbolic: str

    @property
    def coefficients(self) -> tuple[tuple[int, int], ...]:
        return self.index.mode_coefficients()


@dataclass(frozen=True)
class MomentFrequencyTable:
    order: int
    num_modes: int
    rows: tuple[MomentRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def frequencies(self) -> np.ndarray:
        return np.array([r.frequency for r in self.rows], dtype=complex)

    def row(self, index: MomentIndex | str) -> MomentRow:
        if isinstance(index, str):
            index = MomentIndex.parse(index, self.num_modes)
        for r in self.rows:
            if r.index == index:
                return r
        raise KeyError(str(index))

    def to_records(self) -> list[dict]:
        return [
            {
                "order": self.order,
                "symbolic": r.symbolic,
                "re": float(r.frequency.real),
                "im": float(r.frequency.imag),
                "moment_degeneracy": r.moment_degeneracy,
                "multiset": r.index.label(),
            }
            for r in self.rows
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "symbolic", "re", "im", "moment_degeneracy", "multiset"])
        for rec in self.to_records():
            w.writerow([rec["order"], rec["symbolic"], repr(rec["re"]), repr(rec["im"]), rec["moment_degeneracy"], rec["multiset"]])
        return buf.getvalue()


def _omegas(s) -> np.ndarray:
    return np.asarray(getattr(s, "omegas", s), dtype=complex)


def enumerate_frequencies(s, p: int, imag_tol: float = 1e-12) -> MomentFrequencyTable:
    """One row per size-p multiset with its summed basic frequency.

    ``s`` is a :class:`BasicSpectrum` or the slot-ordered frequency array.
    """
    if p < 1:
        raise ValueError("order p must be >= 1")
    om = _omegas(s)
    if len(om) % 2:
        raise ValueError("basic set must have even length")
    m = len(om) // 2
    scale = max(1.0, float(np.abs(om).max(initial=0.0)))
    common = bool(np.ptp(om.imag) <= imag_tol * scale) if len(om) else True
    rows = []
    for idx in enumerate_multisets(m, p):
        freq = complex(sum(om[i] for i in idx.symbols))
        rows.append(MomentRow(idx, freq, moment_degeneracy(idx), symbolic_frequency(idx.mode_coefficients(), p, common)))
    return MomentFrequencyTable(p, m, tuple(rows))


def nonhomogeneous_frequencies(s, p: int) -> list[complex]:
    """Extra frequencies in the driven part of the order-p solution.

    The Langevin sources couple order p to order p-2, so these are the
    order p-2 sums; order 2 is driven by a constant.
    """
    if p < 2:
        raise ValueError("sources first appear at order 2")
    if p == 2:
        return [0j]
    return [r.frequency for r in enumerate_frequencies(s, p - 2)]
