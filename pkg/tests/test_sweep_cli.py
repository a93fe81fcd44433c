import csv
import json

import numpy as np
import pytest

from hybridqubit import cli
from hybridqubit.errors import ConfigError
from hybridqubit.hubbard import SILICON_PARAMETERS, DotParameters
from hybridqubit.sweep import (OBSERVABLES, Axis, SweepSpec, format_report, load_config, parse_config, read_sweep,
                               run_dynamics, run_sweep, validate)
from hybridqubit.sweff import EffectiveCouplings


def small_spec(base=SILICON_PARAMETERS, steps=5, observables=OBSERVABLES):
    return SweepSpec(base, Axis("t13", 0.3, 1.5, steps), Axis("t23", 0.3, 1.5, steps), tuple(observables))


@pytest.fixture(scope="module")
def small_result():
    return run_sweep(small_spec(), timestamp=False)


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_shapes_and_bounds(small_result):
    r = small_result
    for name, arr in r.data.items():
        assert arr.shape[:2] == (5, 5), name
    assert r.data["eigenvalues_2x2"].shape == (5, 5, 2)
    for key in ("prob0_eig1", "prob0_eig2"):
        assert np.all((r.data[key] >= 0) & (r.data[key] <= 1))
    assert np.allclose(r.data["prob0_eig1"] + r.data["prob0_eig2"], 1, atol=1e-12)
    assert np.all(np.diff(r.data["eigenvalues_2x2"], axis=2) >= 0)
    assert np.all(r.data["exact_gap"] > 0)
    assert r.provenance["failed_cells"] == []


def test_trend_across_grid(small_result):
    p = small_result.data["prob0_eig1"]
    assert p[0, 0] >= 0.99 and p[-1, -1] <= 0.05


def test_vanishing_superexchange_line_gives_pure_states(small_result):
    # first grid point is t = Jt: off-diagonal vanishes because Je13 = Je23
    assert small_result.data["prob0_eig1"][0, 0] in (0.0, 1.0)
    assert small_result.data["J1"][0, 0] == pytest.approx(-1.4, abs=1e-15)


def test_near_degenerate_axis():
    spec = SweepSpec(SILICON_PARAMETERS, Axis("t13", 1.0, 1.0 + 1e-14, 2), Axis("t23", 0.5, 1.0, 3),
                     ("prob0_eig1", "J1"))
    r = run_sweep(spec, timestamp=False)
    for arr in r.data.values():
        assert np.abs(arr[0] - arr[1]).max() <= 1e-12


def test_spec_validation():
    with pytest.raises(ConfigError):
        small_spec(observables=("prob0_eig1", "fidelity"))
    with pytest.raises(ConfigError):
        Axis("t12", 0, 1, 3)
    with pytest.raises(ConfigError):
        Axis("t13", 1, 1, 3)
    with pytest.raises(ConfigError):
        Axis("t13", 0, 1, 1)
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"axis1": {"name": "t13", "min": 0, "max": 1, "steps": 2}}, SILICON_PARAMETERS)


def test_workers_give_identical_results():
    spec = small_spec(steps=4, observables=("prob0_eig1", "eigenvalues_2x2", "exact_gap"))
    a = run_sweep(spec, workers=1, timestamp=False)
    b = run_sweep(spec, workers=4, timestamp=False)
    assert a.equals(b)


def test_round_trip(tmp_path, small_result):
    small_result.write(tmp_path)
    back = read_sweep(tmp_path / "sweep.json")
    assert back.equals(small_result)


def test_csv_layout(tmp_path, small_result):
    small_result.write(tmp_path)
    with open(tmp_path / "eigenvalues_2x2.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t13", "t23", "eig1", "eig2"]
    assert len(rows) == 26
    with open(tmp_path / "prob0_eig1.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t13", "t23", "prob0_eig1"]
    # row-major: second row varies axis2 first
    assert float(rows[1][0]) == float(rows[2][0]) and float(rows[1][1]) < float(rows[2][1])


def test_singular_cell_is_missing(tmp_path):
    base = DotParameters(eps2=0.5)
    spec = SweepSpec(base, Axis("eps3", -1.0, 1.0, 3), Axis("t13", 0.1, 0.2, 2), ("prob0_eig1", "J1"))
    r = run_sweep(spec, timestamp=False)
    assert np.all(np.isnan(r.data["J1"][1]))
    assert np.all(np.isfinite(r.data["J1"][[0, 2]]))
    assert [c[:2] for c in r.provenance["failed_cells"]] == [[1, 0], [1, 1]]
    r.write(tmp_path)
    with open(tmp_path / "J1.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[3][2] == "" and rows[4][2] == ""
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert data["observables"]["J1"][1] == [None, None]


def test_dynamics_examples():
    flat = run_dynamics(EffectiveCouplings(0.2, 0.2, -0.5), 50.0, 101, timestamp=False)
    assert np.abs(flat.column("prob1")).max() <= 1e-24
    t = flat.table
    norm = t[:, 1] ** 2 + t[:, 2] ** 2 + t[:, 3] ** 2 + t[:, 4] ** 2
    assert np.abs(norm - 1).max() <= 1e-12
    j1, j2 = 0.4, -0.2
    res = EffectiveCouplings(j1, j2, (j1 + j2) / 2)
    k = run_dynamics(res, 40.0, 4001, timestamp=False)
    assert k.provenance["switching"]["max_transfer"] == pytest.approx(1)
    assert k.provenance["switching"]["t_star_ps"] < 40.0
    assert k.column("prob1").max() >= 0.999
    assert k.provenance["oracle_check"]["max_deviation"] <= 1e-10
    xyz = np.column_stack([k.column("x"), k.column("y"), k.column("z")])
    assert np.allclose(np.linalg.norm(xyz, axis=1), 1, atol=1e-12)
    with pytest.raises(ConfigError):
        run_dynamics(res, 10.0, 1)


def test_validate_examples():
    rep = validate(SILICON_PARAMETERS.replace(t13=1.0, t23=1.0))
    assert rep["hierarchy"]["warnings"] == []
    assert rep["denominators"]["201"]["sign"] == "-"
    assert any("negative denominator" in w for w in rep["warnings"])
    assert rep["right_dot_check"]["corrected_are_eigenvalues"] == [True, True]
    assert rep["right_dot_check"]["literal_are_eigenvalues"] == [False, False]
    assert "literal_condition" in rep["switching"]
    assert "warnings:" in format_report(rep)

    quiet = validate(DotParameters(eps1=0.0, eps2=0.5, eps3=1.0, t13=0.01, t23=0.01))
    assert quiet["sw"]["spectral_deviation"] <= 1e-3
    assert quiet["sw"]["spectral_deviation_prefactor2"] <= 1e-12
    assert not quiet["sw"]["exact_flagged"]
    # the prefactor-4 formula is off by a factor two in the superexchange, hence flagged relative to it
    assert quiet["sw"]["flagged"]

    strong = validate(DotParameters(eps1=0.0, eps2=0.1, eps3=0.2, U1=3, U2=3, U3=3, U12=2, U13=1, U23=1,
                                    t13=2.0, t23=1.5, Jt12=0.2, Je13=0.1))
    assert strong["sw"]["flagged"] and strong["sw"]["exact_flagged"]


def test_validate_records_singular_configuration():
    rep = validate(DotParameters())
    assert "error" in rep["sw"]
    assert any("vanishing denominator" in w for w in rep["warnings"])


def test_config_parsing(tmp_path):
    p, o = parse_config({"eps1": 0.1, "couplings": {"J1": 1, "J2": 0, "Jprime": 0.5}})
    assert p.eps1 == 0.1 and o == EffectiveCouplings(1.0, 0.0, 0.5)
    for bad in ({"epsilon": 1}, {"couplings": {"J1": 1}}, [1, 2], {"U1": -3}):
        with pytest.raises(ConfigError):
            parse_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "broken.json")


# --------------------------------------------------------------------- CLI

@pytest.fixture
def si_config(tmp_path):
    return write_json(tmp_path / "si.json", {**SILICON_PARAMETERS.as_dict(), "t13": 1.0, "t23": 1.0})


def test_cli_couplings(si_config, capsys):
    assert cli.main(["couplings", si_config, "--json"]) == 0
    out = capsys.readouterr()
    d = json.loads(out.out)
    assert d["Jprime"] == pytest.approx(-1.0)
    assert d["denominators"]["201"] == pytest.approx(-0.3)
    assert "negative" in out.err
    assert cli.main(["couplings", si_config, "--prefactor", "2"]) == 0
    assert "J1" in capsys.readouterr().out


def test_cli_spectrum(si_config, capsys):
    assert cli.main(["spectrum", si_config, "--json"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert len(d["exact"]) == 20 and len(d["effective"]) == 8
    assert sorted(r["S"] for r in d["effective"]).count(1.5) == 4
    assert cli.main(["spectrum", si_config]) == 0
    assert "S= 3/2" in capsys.readouterr().out


def test_cli_sweep_deterministic(tmp_path, si_config, capsys):
    spec = write_json(tmp_path / "spec.json", {
        "axis1": {"name": "t13", "min": 0.3, "max": 1.5, "steps": 4},
        "axis2": {"name": "t23", "min": 0.3, "max": 1.5, "steps": 3}})
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli.main(["sweep", si_config, spec, "--out", str(out), "--reproducible", "--workers", "2"]) == 0
        outs.append(out)
    capsys.readouterr()
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted([f"{o}.csv" for o in OBSERVABLES] + ["sweep.json"])
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_cli_sweep_reports_singular_cells(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"eps2": 0.5})
    spec = write_json(tmp_path / "s.json", {
        "axis1": {"name": "eps3", "min": -1, "max": 1, "steps": 3},
        "axis2": {"name": "t13", "min": 0.1, "max": 0.2, "steps": 2}, "observables": ["J1"]})
    assert cli.main(["sweep", cfg, spec, "--out", str(tmp_path / "o")]) == 0
    assert "singular" in capsys.readouterr().err


def test_cli_dynamics(tmp_path, si_config, capsys):
    out = tmp_path / "traj.csv"
    args = ["dynamics", si_config, "--tmax", "20", "--samples", "50", "--out", str(out), "--reproducible"]
    assert cli.main(args) == 0
    first = out.read_bytes()
    prov = json.loads(out.with_suffix(".json").read_text())
    assert prov["timestamp"] is None and prov["config"]["samples"] == 50
    assert cli.main(args) == 0
    assert out.read_bytes() == first
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t_ps", "re_a", "im_a", "re_b", "im_b", "prob1", "x", "y", "z"]
    assert len(rows) == 51
    assert "analytic maximum" in capsys.readouterr().out


def test_cli_dynamics_with_coupling_override(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"couplings": {"J1": 0.4, "J2": -0.2, "Jprime": 0.1}})
    out = tmp_path / "t.csv"
    assert cli.main(["dynamics", cfg, "--tmax", "40", "--samples", "2001", "--out", str(out)]) == 0
    prob = [float(r[5]) for r in list(csv.reader(out.open()))[1:]]
    assert max(prob) >= 0.999


def test_cli_validate(si_config, capsys):
    assert cli.main(["validate", si_config]) == 0
    text = capsys.readouterr().out
    assert "negative denominator" in text and "literal condition" in text
    assert cli.main(["validate", si_config, "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["denominators"]["012"]["value"] == pytest.approx(1.55)


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["couplings", str(tmp_path / "nope.json")]) == 1
    bad = write_json(tmp_path / "bad.json", {"eps9": 1})
    assert cli.main(["validate", bad]) == 1
    singular = write_json(tmp_path / "zero.json", {})
    assert cli.main(["couplings", singular]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["dynamics", singular, "--tmax", "x", "--samples", "3", "--out", "o.csv"])
    assert exc.value.code == 1
    capsys.readouterr()
