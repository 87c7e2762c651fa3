import json

import numpy as np
import pytest

from hlep import cli
from hlep.config import ConfigError, load_config, parse_range, parse_system, parse_times

TWO_MODE = {"gamma1d": 1.0, "gamma2a": 0.2, "epsilon": 1.0, "kappa": 0.3, "g": 0.1}


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def _run(tmp_path, command, cfg, *extra, out="out"):
    argv = [command, "--out", str(tmp_path / out)]
    if cfg is not None:
        argv += ["--config", _write(tmp_path, cfg)]
    return cli.main(argv + list(extra))


# --- configuration -------------------------------------------------------------------


def test_parse_system_forms():
    sy, two = parse_system(TWO_MODE)
    assert two is not None and sy.num_modes == 2
    full = {
        "modes": 1,
        "epsilon": [[1.0]],
        "kappa": [[[0.1, 0.2]]],
        "rates": [{"kind": "damped", "rate": 0.5}],
    }
    sy, two = parse_system(full)
    assert two is None and sy.kappa[0, 0] == 0.1 + 0.2j


@pytest.mark.parametrize(
    "obj,path",
    [
        ({**TWO_MODE, "gamma1d": -1}, "system.gamma1d"),
        ({k: v for k, v in TWO_MODE.items() if k != "g"}, "system.g"),
        ({**TWO_MODE, "extra": 1}, "system"),
        ({"modes": 1, "epsilon": [[1]], "kappa": [[0]], "rates": [{"kind": "lossy", "rate": 1}]}, "system.rates[0].kind"),
        ({"modes": 2, "epsilon": [[1]], "kappa": [[0]], "rates": []}, "system.epsilon"),
        ({"modes": 1, "epsilon": [["x"]], "kappa": [[0]], "rates": [{"kind": "damped", "rate": 1}]}, "system.epsilon[0][0]"),
    ],
)
def test_config_errors_name_the_field(obj, path):
    with pytest.raises(ConfigError) as exc:
        parse_system(obj)
    assert exc.value.path == path


def test_load_config_overrides_and_digest():
    cfg = load_config(json.dumps({"system": TWO_MODE, "order": 2}), {"order": 3, "format": None})
    assert cfg.order == 3 and cfg.fmt == "csv"
    again = load_config(json.dumps({"order": 3, "system": TWO_MODE}), {})
    assert cfg.digest == again.digest
    with pytest.raises(ConfigError, match="line 1"):
        load_config("{", {})
    with pytest.raises(ConfigError):
        load_config("[]", {})
    with pytest.raises(ConfigError, match="system"):
        load_config("{}", {})


def test_ranges_and_times():
    assert parse_range([0, 1, 5], "r") == (0.0, 1.0, 5)
    with pytest.raises(ConfigError):
        parse_range([1, 0, 5], "r")
    assert len(parse_times({"t0": 0, "t1": 1, "n": 11})) == 11
    assert parse_times([0, 0.5, 2]).tolist() == [0, 0.5, 2]
    with pytest.raises(ConfigError):
        parse_times([0, 0])


# --- commands ----------------------------------------------------------------------


def test_spectrum_command(tmp_path, capsys):
    assert _run(tmp_path, "spectrum", {"system": TWO_MODE}) == 0
    text = (tmp_path / "out" / "spectrum.csv").read_text()
    assert text.startswith("# hlep ")
    assert "closed form vs numeric" in capsys.readouterr().out
    assert _run(tmp_path, "spectrum", {"system": {**TWO_MODE, "gamma2a": 1.0}}, "--format", "json") == 0
    doc = json.loads((tmp_path / "out" / "spectrum.json").read_text())
    assert doc["closed_form"]["balanced"] and doc["closed_form"]["agree"]
    assert doc["meta"]["tool"] == "hlep"


def test_outputs_are_deterministic(tmp_path):
    cfg = {"system": TWO_MODE, "order": 2}
    _run(tmp_path, "moments", cfg, out="a")
    _run(tmp_path, "moments", cfg, out="b")
    for p in (1, 2):
        assert (tmp_path / "a" / f"moments_p{p}.csv").read_bytes() == (tmp_path / "b" / f"moments_p{p}.csv").read_bytes()


def test_moments_command(tmp_path):
    assert _run(tmp_path, "moments", {"system": TWO_MODE}, "--order", "3") == 0
    lines = (tmp_path / "out" / "moments_p3.csv").read_text().splitlines()
    assert "# rows 20 expected 20" in lines
    assert len([ln for ln in lines if not ln.startswith("#")]) == 21
    assert _run(tmp_path, "moments", {"system": TWO_MODE}, "--order", "0") == 2


def test_ep_scan_command(tmp_path):
    cfg = {"sweep": {"gamma_plus": [0, 1.5, 16], "kappa": [0, 1.5, 16], "g": [-2, 2, 21]}}
    assert _run(tmp_path, "ep-scan", cfg) == 0
    lines = [ln for ln in (tmp_path / "out" / "surface.csv").read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == "gamma_plus_over_eps,kappa_over_eps,g_over_eps,branch,residual"
    doc = json.loads((tmp_path / "out" / "degeneracy.json").read_text())
    assert {p["branch"] for p in doc["points"]} == {"minus", "plus", "circle"}
    for p in doc["points"]:
        assert any(c["classification"] != "none" for c in p["report"]["clusters"])


def test_propagate_command(tmp_path):
    cfg = {
        "system": TWO_MODE,
        "order": 2,
        "time_grid": {"t0": 0, "t1": 12, "n": 121},
        "initial": {"b1": [0.5, 0.1], "b1^dag": [0.5, -0.1], "b1^dag b1": 1.0},
    }
    assert _run(tmp_path, "propagate", cfg) == 0
    doc = json.loads((tmp_path / "out" / "frequencies.json").read_text())
    basic = np.array([complex(*w) for w in doc["basic"]])
    first = [r for r in doc["recovered"] if r["multiset"] == "b1"][0]
    for f in first["frequencies"]:
        assert np.min(np.abs(basic - complex(*f))) < 1e-6
    bad = {**cfg, "initial": {"b1^3": 1.0}}
    assert _run(tmp_path, "propagate", bad) == 2


def test_tla_command(tmp_path):
    cfg = {"tla": {"omega": 1.0, "gamma_x": 1.0, "init": [1, 0.3, 0.3, 0]}, "time_grid": {"t0": 0, "t1": 20, "n": 201}}
    assert _run(tmp_path, "tla", cfg) == 0
    doc = json.loads((tmp_path / "out" / "tla_frequencies.json").read_text())
    assert doc["defective"] and doc["defective"][0][1] == 2
    assert _run(tmp_path, "tla", {"tla": {"omega": 1.0}}) == 2


def test_oracle_command(tmp_path):
    cfg = {
        "system": {"modes": 1, "epsilon": [[1.0]], "kappa": [[0.0]], "rates": [{"kind": "damped", "rate": 0.5}]},
        "order": 3,
        "cutoff": 12,
        "k": 6,
    }
    assert _run(tmp_path, "oracle", cfg) == 0
    doc = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert all(doc["converged"]) and not doc["match"]["unmatched_oracle"]
    assert _run(tmp_path, "oracle", cfg, "--cutoff", "80") == 4
    gain = {**cfg, "system": {**cfg["system"], "rates": [{"kind": "amplified", "rate": 0.5}]}}
    assert _run(tmp_path, "oracle", gain) == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("singular")

    monkeypatch.setattr(cli, "eigendecompose", boom)
    assert _run(tmp_path, "spectrum", {"system": TWO_MODE}) == 3


def test_missing_config_file(tmp_path):
    assert cli.main(["spectrum", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
