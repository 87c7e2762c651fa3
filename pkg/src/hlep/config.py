"""Run configuration parsing and deterministic output writers."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .model import ModelError, ModeRate, QuadraticSystem, TwoModeParams, make_system, two_mode_system


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _num(value, path, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(path, "must be > 0")
    if nonneg and value < 0:
        raise ConfigError(path, "must be >= 0")
    return int(value) if integer else float(value)


def _complex_matrix(value, m, path):
    if not isinstance(value, list) or len(value) != m:
        raise ConfigError(path, f"expected a {m}x{m} matrix")
    out = np.zeros((m, m), dtype=complex)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != m:
            raise ConfigError(f"{path}[{i}]", f"expected a row of length {m}")
        for j, z in enumerate(row):
            p = f"{path}[{i}][{j}]"
            if isinstance(z, list):
                if len(z) != 2:
                    raise ConfigError(p, "complex entries are [re, im]")
                out[i, j] = complex(_num(z[0], p + "[0]"), _num(z[1], p + "[1]"))
            else:
                out[i, j] = _num(z, p)
    return out


def parse_system(obj: Any, path: str = "system") -> tuple[QuadraticSystem, TwoModeParams | None]:
    """Full ``{modes, epsilon, kappa, rates}`` form or the two-mode shorthand."""
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if "gamma1d" in obj:
        vals = {}
        for key in ("gamma1d", "gamma2a", "epsilon", "kappa", "g"):
            if key not in obj:
                raise ConfigError(f"{path}.{key}", "missing")
            vals[key] = _num(obj[key], f"{path}.{key}", nonneg=key.startswith("gamma"))
        extra = set(obj) - set(vals)
        if extra:
            raise ConfigError(path, f"unknown keys {sorted(extra)}")
        p = TwoModeParams(**vals)
        return two_mode_system(p), p
    for key in ("modes", "epsilon", "kappa", "rates"):
        if key not in obj:
            raise ConfigError(f"{path}.{key}", "missing")
    m = _num(obj["modes"], f"{path}.modes", positive=True, integer=True)
    eps = _complex_matrix(obj["epsilon"], m, f"{path}.epsilon")
    kap = _complex_matrix(obj["kappa"], m, f"{path}.kappa")
    rates = obj["rates"]
    if not isinstance(rates, list) or len(rates) != m:
        raise ConfigError(f"{path}.rates", f"expected {m} entries")
    parsed = []
    for i, r in enumerate(rates):
        rp = f"{path}.rates[{i}]"
        if not isinstance(r, dict) or set(r) != {"kind", "rate"}:
            raise ConfigError(rp, "expected {kind, rate}")
        if r["kind"] not in ("damped", "amplified"):
            raise ConfigError(f"{rp}.kind", "must be 'damped' or 'amplified'")
        parsed.append(ModeRate(r["kind"], _num(r["rate"], f"{rp}.rate", nonneg=True)))
    try:
        return make_system(eps, kap, parsed), None
    except ModelError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_range(value, path) -> tuple[float, float, int]:
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(path, "expected [lo, hi, n]")
    lo, hi = _num(value[0], f"{path}[0]"), _num(value[1], f"{path}[1]")
    n = _num(value[2], f"{path}[2]", integer=True)
    if not hi > lo:
        raise ConfigError(path, "hi must exceed lo")
    if n < 2:
        raise ConfigError(f"{path}[2]", "need at least 2 samples")
    return lo, hi, n


def parse_times(obj, path="time_grid") -> np.ndarray:
    if isinstance(obj, dict):
        t0 = _num(obj.get("t0", 0.0), f"{path}.t0")
        t1 = _num(obj.get("t1"), f"{path}.t1") if "t1" in obj else None
        n = _num(obj.get("n", 0), f"{path}.n", integer=True)
        if t1 is None or n < 2 or not t1 > t0:
            raise ConfigError(path, "needs t1 > t0 and n >= 2")
        return np.linspace(t0, t1, n)
    if isinstance(obj, list):
        ts = np.array([_num(x, f"{path}[{i}]") for i, x in enumerate(obj)])
        if len(ts) < 1 or np.any(np.diff(ts) <= 0):
            raise ConfigError(path, "times must be strictly increasing")
        return ts
    raise ConfigError(path, "expected {t0, t1, n} or a list of times")


@dataclass
class RunConfig:
    raw: dict
    system: QuadraticSystem | None = None
    two_mode: TwoModeParams | None = None
    order: int = 2
    tol: float = 1e-9
    cutoff: int = 8
    fmt: str = "csv"
    jobs: int = 1
    seed: int = 0
    allow_amplified: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(text: str | None, overrides: dict | None = None, need_system: bool = True) -> RunConfig:
    """Parse JSON config text; command-line overrides win over file values."""
    raw: dict = {}
    if text is not None:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError("", "top level must be an object")
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
    cfg = RunConfig(raw=raw)
    if "system" in raw:
        cfg.system, cfg.two_mode = parse_system(raw["system"])
    elif need_system:
        raise ConfigError("system", "missing")
    if "order" in raw:
        cfg.order = _num(raw["order"], "order", integer=True)
        if cfg.order < 1:
            raise ConfigError("order", "must be >= 1")
    if "tol" in raw:
        cfg.tol = _num(raw["tol"], "tol", positive=True)
    if "cutoff" in raw:
        cfg.cutoff = _num(raw["cutoff"], "cutoff", positive=True, integer=True)
    if "format" in raw:
        if raw["format"] not in ("csv", "json"):
            raise ConfigError("format", "must be 'csv' or 'json'")
        cfg.fmt = raw["format"]
    if "jobs" in raw:
        cfg.jobs = _num(raw["jobs"], "jobs", positive=True, integer=True)
    if "seed" in raw:
        cfg.seed = _num(raw["seed"], "seed", integer=True)
    cfg.allow_amplified = bool(raw.get("allow_amplified", False))
    return cfg


# --- writers -------------------------------------------------------------------------


def header_lines(cfg: RunConfig) -> list[str]:
    return [f"# hlep {__version__}", f"# config-sha256 {cfg.digest}"]


def meta(cfg: RunConfig) -> dict:
    return {"tool": "hlep", "version": __version__, "config_sha256": cfg.digest, "schema": 1}


def write_json(path: Path, cfg: RunConfig, payload: dict) -> Path:
    doc = {"meta": meta(cfg), **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_csv(path: Path, cfg: RunConfig, columns, rows, extra_header=()) -> Path:
    buf = io.StringIO()
    for line in header_lines(cfg) + list(extra_header):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def cplx(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]
