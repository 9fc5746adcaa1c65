import json
import math

import pytest

from frontlab import cli
from frontlab import config as cf
from frontlab.errors import ConfigError, ValidationError
from frontlab.runner import run_experiment, sweep, validate

SMALL = """
[reaction]
reaction = monostable_kpp(a=4)
[grid]
x_min = -30
x_max = 30
dx = 0.05
[time]
T = 1
dt = 0.01
stride = 10
[components]
left = front_left_of(a=0)
"""


def test_parse_full():
    cfg = cf.loads(SMALL + "right = front_indicator(a=0, b=inf)\n[output]\ndir = out/x-1\nspectrum = true\n")
    assert cfg.reaction.kw == {"a": 4.0}
    assert cfg.grid.dx == 0.05 and cfg.T == 1.0 and cfg.stride == 10
    assert [k for k, _ in cfg.components] == ["left", "right"]
    assert cfg.components[1][1].kw["b"] == math.inf
    assert cfg.out_dir == "out/x-1" and cfg.spectrum


def test_defaults():
    cfg = cf.loads("")
    assert cfg.reaction.name == "monostable_kpp" and cfg.grid.dx == 0.01 and cfg.dt == 0.005


@pytest.mark.parametrize(
    "text,line",
    [
        ("[reaction]\nreaction = nope(a=1)\n", 2),
        ("\n\n[bogus]\n", 3),
        ("x = 1\n", 1),
        ("[time]\nT = 1\nstride = 2.5\n", 3),
        ("[grid]\ndx = 0.07\n", 2),
        ("[components]\nc = front_left_of(a=\n", 2),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as e:
        cf.loads(text)
    assert e.value.line == line and str(e.value).startswith(f"line {line}:")


def test_overrides():
    cfg = cf.loads(SMALL, ["time.T=2", "dx=0.1", "reaction.reaction=bistable_cubic(rho=0.3)"])
    assert cfg.T == 2.0 and cfg.grid.dx == 0.1 and cfg.reaction.name == "bistable_cubic"
    with pytest.raises(ConfigError):
        cf.loads(SMALL, ["nokey=1"])
    with pytest.raises(ConfigError):
        cf.loads(SMALL, ["T"])


def test_bad_parameter_is_validation_error():
    cfg = cf.loads("[reaction]\nreaction = bistable_cubic(rho=0.7)\n")
    with pytest.raises(ValidationError):
        cfg.build_reaction()


def test_minimal_run_writes_four_files(tmp_path):
    m = run_experiment(cf.loads(SMALL), tmp_path)
    assert sorted(m["outputs"]) == ["front.csv", "front.json", "snapshot_left_t1.csv", "timeseries.csv"]
    assert (tmp_path / "manifest.json").exists()
    saved = json.loads((tmp_path / "manifest.json").read_text())
    assert saved["results"]["proportions"]["left"] == pytest.approx(0.5 - 1 / math.pi, abs=1e-3)


def test_partition_adds_sum_check(tmp_path):
    cfg = cf.loads(SMALL + "right = front_indicator(a=0, b=inf)\n")
    m = run_experiment(cfg, tmp_path)
    assert m["results"]["final"]["sum_check"] <= 1e-9
    header = (tmp_path / "timeseries.csv").read_text().splitlines()[0]
    assert "sum_check" in header and "p_error" in header


def test_runs_are_deterministic(tmp_path):
    cfg = cf.loads(SMALL)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("timeseries.csv", "front.csv", "snapshot_left_t1.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_sweep_order_and_isolation(tmp_path):
    cfg = cf.loads(SMALL)
    s1 = sweep(cfg, "a", [6.0, 1.0, 3.0], 1, tmp_path / "s1")
    s3 = sweep(cfg, "a", [6.0, 1.0, 3.0], 3, tmp_path / "s3")
    assert [r["value"] for r in s1["rows"]] == [6.0, 1.0, 3.0]
    assert s1["rows"] == s3["rows"]
    assert s1["rows"][1]["error"] is not None  # no closed-form front for a < 2
    assert s1["rows"][0]["error"] is None and s1["rows"][2]["error"] is None
    assert sweep(cfg, "a", [], 1, tmp_path / "s0")["rows"] == []
    with pytest.raises(ConfigError):
        sweep(cfg, "beta", [1.0])


def test_validate_cases():
    assert validate(cf.loads(SMALL)).ok
    narrow = validate(cf.loads(SMALL, ["x_min=-5", "x_max=5"]))
    assert not narrow.ok and "GridTooNarrow" in narrow.render()
    cmp_cfg = cf.loads(SMALL + "[observers]\nm = min_v()\n", ["dt=0.01"])
    rep = validate(cmp_cfg)
    assert not rep.ok and "suggest dt" in rep.render()
    assert not validate(cf.loads("[reaction]\nreaction = bistable_cubic(rho=0.7)\n")).ok


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL)
    out = str(tmp_path / "o")
    assert cli.main(["validate", "--config", str(cfg)]) == 0
    assert cli.main(["validate", "--config", str(cfg), "--override", "x_max=3"]) == 1
    assert cli.main(["simulate", "--config", str(cfg), "--out", out]) == 0
    assert cli.main(["front", "--config", str(cfg), "--out", out]) == 0
    assert cli.main(["proportion", "--config", str(cfg)]) == 0
    assert cli.main(["spectrum", "--config", str(cfg), "--out", out]) == 0
    assert (tmp_path / "o" / "spectrum.json").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("[nonsense]\n")
    assert cli.main(["simulate", "--config", str(bad)]) == 1
    pulled = ["--override", "reaction=monostable_kpp(a=0)", "--override", "front.source=shooting", "--override", "x_min=-60", "--override", "x_max=60"]
    assert cli.main(["proportion", "--config", str(cfg), *pulled]) == 2
    assert cli.main(["proportion", "--config", str(cfg), *pulled, "--pulled-zero"]) == 0
    capsys.readouterr()
