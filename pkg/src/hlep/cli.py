"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 dimension cap.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .config import ConfigError, RunConfig, _num, cplx, load_config, parse_range, parse_times, write_csv, write_json
from .dynamics import (
    PairingError,
    SingularTransformError,
    build_dynamics_matrix,
    eigendecompose,
    two_mode_closed_form,
)
from .eigen import ConvergenceError
from .dynamics import two_mode_matrix
from .eppoints import SURFACE_COLUMNS, detect_coalescence, qep_residuals, sweep_surface
from .model import TwoModeParams
from .momentspec import MomentIndex, count_frequencies, enumerate_frequencies
from .oracle import (
    DEFAULT_MAX_SUPEROP_DIM,
    DimensionCapError,
    OracleConvergenceError,
    OracleError,
    compare_spectra,
    converged_spectrum,
    oracle_report,
)
from .propagate import (
    frequency_content,
    propagate_hierarchy,
    propagate_hierarchy_a,
    state_from_normal_ordered,
    tla_evolution,
    to_b_basis,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CAP = 0, 2, 3, 4


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _matched_deviation(a, b) -> float:
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


# --- commands -----------------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    d = build_dynamics_matrix(cfg.system)
    s = eigendecompose(d)
    payload = {"spectrum": s.to_dict(), "coalescing_pairs": list(s.coalescing)}
    line = None
    if cfg.two_mode is not None:
        cf = two_mode_closed_form(cfg.two_mode)
        dev = _matched_deviation(cf.omegas, s.omegas)
        p = cfg.two_mode
        payload["closed_form"] = {
            "omegas": [cplx(w) for w in cf.omegas],
            "max_deviation": dev,
            "agree": dev <= 1e-10 * max(1.0, float(np.linalg.norm(d.m_omega, 2))),
            "balanced": p.balanced,
            "omega_i": p.gamma_minus,
            "phase_flipped": cf.phase_flipped,
        }
        line = f"closed form vs numeric: max deviation {dev:.3e}" + ("; balanced: Omega^i = 0" if p.balanced else "")
    if cfg.fmt == "json":
        write_json(out / "spectrum.json", cfg, payload)
    else:
        partner = {}
        for i, j in s.pairing:
            partner[i], partner[j] = j, i
        rows = [(k, float(w.real), float(w.imag), partner.get(k, k)) for k, w in enumerate(s.omegas)]
        extra = [f"# diagonalizable {str(s.diagonalizable).lower()}"]
        if line:
            extra.append(f"# {line}")
        write_csv(out / "spectrum.csv", cfg, ["index", "re", "im", "partner"], rows, extra)
    if line:
        print(line)
    return EXIT_OK


def cmd_moments(cfg: RunConfig, out: Path) -> int:
    s = eigendecompose(build_dynamics_matrix(cfg.system))
    m = cfg.system.num_modes
    for p in range(1, cfg.order + 1):
        table = enumerate_frequencies(s, p)
        expected = count_frequencies(m, p)
        if len(table) != expected:
            raise RuntimeError(f"order {p}: {len(table)} rows, expected {expected}")
        head = f"rows {len(table)} expected {expected}"
        if cfg.fmt == "json":
            write_json(out / f"moments_p{p}.json", cfg, {"order": p, "rows": table.to_records(), "count": expected})
        else:
            recs = table.to_records()
            cols = ["order", "symbolic", "re", "im", "moment_degeneracy", "multiset"]
            write_csv(out / f"moments_p{p}.csv", cfg, cols, [[r[c] for c in cols] for r in recs], [f"# {head}"])
        print(f"order {p}: {head}")
    return EXIT_OK


def cmd_ep_scan(cfg: RunConfig, out: Path) -> int:
    sweep = cfg.raw.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep", "expected an object")
    gp = parse_range(sweep.get("gamma_plus", [0.0, 1.5, 61]), "sweep.gamma_plus")
    ka = parse_range(sweep.get("kappa", [0.0, 1.5, 61]), "sweep.kappa")
    gg = parse_range(sweep.get("g", [-2.0, 2.0, 81]), "sweep.g")
    tol = float(cfg.raw.get("tol", 1e-10))
    pts = sweep_surface(gp, ka, gg, tol=tol, jobs=cfg.jobs)
    rows = [(p.gamma_plus_over_eps, p.kappa_over_eps, p.g_over_eps, p.branch, p.residual) for p in pts]
    if cfg.fmt == "json":
        write_json(out / "surface.json", cfg, {"columns": list(SURFACE_COLUMNS), "points": rows})
    else:
        write_csv(out / "surface.csv", cfg, SURFACE_COLUMNS, rows)
    # degeneracy reports at one representative point per branch
    reports = []
    seen = set()
    for p in pts:
        if p.branch in seen:
            continue
        seen.add(p.branch)
        # eps = 1; pick gamma1d = 4 gamma_+, gamma2a = 0
        params = TwoModeParams(4 * p.gamma_plus_over_eps, 0.0, 1.0, p.kappa_over_eps, p.g_over_eps)
        rep = detect_coalescence(two_mode_matrix(params))
        reports.append(
            {
                "branch": p.branch,
                "params": params.to_dict(),
                "residuals": list(qep_residuals(params)),
                "report": rep.to_dict(),
            }
        )
    write_json(out / "degeneracy.json", cfg, {"points": reports})
    print(f"{len(pts)} surface points")
    return EXIT_OK


def _initial_state(cfg: RunConfig, order: int):
    init = cfg.raw.get("initial", {})
    if not isinstance(init, dict):
        raise ConfigError("initial", "expected an object of normally ordered moments")
    values = {}
    m = cfg.system.num_modes
    for key, v in init.items():
        try:
            idx = MomentIndex.parse(key, m)
        except ValueError as exc:
            raise ConfigError(f"initial.{key}", str(exc)) from None
        if idx.order > order:
            raise ConfigError(f"initial.{key}", f"order exceeds {order}")
        if isinstance(v, list) and len(v) == 2:
            values[idx] = complex(float(v[0]), float(v[1]))
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            values[idx] = complex(v)
        else:
            raise ConfigError(f"initial.{key}", "expected a number or [re, im]")
    return state_from_normal_ordered(values, m, order)


def cmd_propagate(cfg: RunConfig, out: Path) -> int:
    times = parse_times(cfg.raw.get("time_grid", {"t0": 0.0, "t1": 10.0, "n": 101}))
    d = build_dynamics_matrix(cfg.system)
    s = eigendecompose(d)
    init = _initial_state(cfg, cfg.order)
    if s.p_inverse is not None:
        ib, k = to_b_basis(s, d, init)
        states = [st.transform(s.p_matrix, "a") for st in propagate_hierarchy(s, k, ib, times)]
    else:
        states = propagate_hierarchy_a(d, init, times)
    rows = [r for st in states for r in st.to_records()]
    write_csv(out / "trajectory.csv", cfg, ["t", "multiset", "re", "im"], [(float(a), b, float(c), float(e)) for a, b, c, e in rows])
    report = []
    uniform = len(times) >= 64 and np.allclose(np.diff(times), times[1] - times[0])
    if uniform:
        dt = float(times[1] - times[0])
        for p in range(1, cfg.order + 1):
            for idx in states[0].canonical(p):
                series = np.array([st.value(idx.symbols) for st in states])
                if np.abs(series).max() < 1e-14:
                    continue
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    fit = frequency_content(series, dt)
                report.append(
                    {
                        "multiset": idx.label(),
                        "frequencies": [cplx(f) for f in fit.frequencies],
                        "defective": [[cplx(f), n] for f, n in fit.defective],
                        "residual": fit.residual,
                        "warning": fit.warning,
                    }
                )
    write_json(out / "frequencies.json", cfg, {"recovered": report, "basic": [cplx(w) for w in s.omegas]})
    return EXIT_OK


def cmd_tla(cfg: RunConfig, out: Path) -> int:
    tla = cfg.raw.get("tla")
    if not isinstance(tla, dict):
        raise ConfigError("tla", "expected {omega, gamma_x, init}")
    omega = _num(tla.get("omega"), "tla.omega")
    gx = _num(tla.get("gamma_x"), "tla.gamma_x", nonneg=True)
    init = tla.get("init", [0.5, 0.5, 0.0, 0.5])
    if not isinstance(init, list) or len(init) != 4:
        raise ConfigError("tla.init", "expected 4 mean values (s0, s+, s-, s1)")
    x0 = [complex(*v) if isinstance(v, list) else complex(_num(v, f"tla.init[{i}]")) for i, v in enumerate(init)]
    times = parse_times(cfg.raw.get("time_grid", {"t0": 0.0, "t1": 10.0, "n": 201}))
    traj = tla_evolution(omega, gx, x0, times)
    names = ["s0", "s+", "s-", "s1"]
    rows = [(float(t), names[c], float(traj[i, c].real), float(traj[i, c].imag)) for i, t in enumerate(times) for c in range(4)]
    write_csv(out / "tla_trajectory.csv", cfg, ["t", "component", "re", "im"], rows)
    payload = {}
    if len(times) >= 64 and np.allclose(np.diff(times), times[1] - times[0]):
        fit = frequency_content(traj[:, 1], float(times[1] - times[0]))
        payload = {
            "component": "s+",
            "frequencies": [cplx(f) for f in fit.frequencies],
            "defective": [[cplx(f), n] for f, n in fit.defective],
            "residual": fit.residual,
        }
    write_json(out / "tla_frequencies.json", cfg, payload)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out: Path) -> int:
    k = _num(cfg.raw.get("k", 10), "k", positive=True, integer=True)
    cap = _num(cfg.raw.get("max_superop_dim", DEFAULT_MAX_SUPEROP_DIM), "max_superop_dim", positive=True, integer=True)
    step = _num(cfg.raw.get("cutoff_step", 4), "cutoff_step", positive=True, integer=True)
    tol = _num(cfg.raw.get("match_tol", 1e-4), "match_tol", positive=True)
    conv = converged_spectrum(cfg.system, cfg.cutoff, k, tol, step, cap, cfg.allow_amplified)
    s = eigendecompose(build_dynamics_matrix(cfg.system))
    tables = [enumerate_frequencies(s, p) for p in range(1, cfg.order + 1)]
    match = compare_spectra(tables, conv.eigenvalues, tol)
    write_json(out / "oracle.json", cfg, oracle_report(cfg.system, conv, match))
    print(
        f"matched {len(match.matched)}/{len(conv.eigenvalues)} oracle eigenvalues, "
        f"max deviation {match.max_deviation:.3e}, converged {int(conv.converged.sum())}/{len(conv.converged)}"
    )
    return EXIT_OK


COMMANDS = {
    "spectrum": (cmd_spectrum, True),
    "moments": (cmd_moments, True),
    "ep-scan": (cmd_ep_scan, False),
    "propagate": (cmd_propagate, True),
    "tla": (cmd_tla, False),
    "oracle": (cmd_oracle, True),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hlep", description="Eigenfrequency analysis of quadratic open bosonic systems.")
    ap.add_argument("--version", action="version", version=f"hlep {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), dest="fmt")
        p.add_argument("--order", type=int)
        p.add_argument("--cutoff", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--jobs", type=int)
        p.add_argument("--allow-amplified", action="store_true", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func, need_system = COMMANDS[args.command]
    overrides = {
        "format": args.fmt,
        "order": args.order,
        "cutoff": args.cutoff,
        "tol": args.tol,
        "jobs": args.jobs,
        "allow_amplified": args.allow_amplified,
    }
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else None
        cfg = load_config(text, overrides, need_system=need_system)
        return func(cfg, _out_dir(args))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, OracleError) as exc:
        if isinstance(exc, DimensionCapError):
            print(f"dimension cap: {exc}", file=sys.stderr)
            return EXIT_CAP
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        ConvergenceError,
        PairingError,
        SingularTransformError,
        OracleConvergenceError,
        np.linalg.LinAlgError,
        RuntimeError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
