import json
import math

import numpy as np
import pytest

from wickbridge import closed_form as cf
from wickbridge.cli import OUTPUT_ENV, main
from wickbridge.grid import read_field_csv
from wickbridge.master import SmoluchowskiSpec
from wickbridge.stochastic import LangevinSpec
from wickbridge.wick import GeneratorSpec, HamiltonianSpec, Polynomial, dump_spec

GRID = ["--x-min", "-8", "--x-max", "8", "--n", "321"]


@pytest.fixture(autouse=True)
def no_env_dir(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)


@pytest.fixture
def specs(tmp_path):
    paths = {}
    for name, spec in {
        "harmonic": HamiltonianSpec.harmonic(1.0, 1.0, 1.0),
        "free": HamiltonianSpec.free(),
        "brown": GeneratorSpec.brown(1.0),
        "ou": GeneratorSpec.ornstein_uhlenbeck(1.0, 0.5),
        "heuclid": GeneratorSpec.harmonic(1.0, 1.0),
        "smol": SmoluchowskiSpec(1.0, Polynomial((0.0, 0.5))),
        "langevin": LangevinSpec.ornstein_uhlenbeck(1.0, 0.5),
    }.items():
        p = tmp_path / f"{name}.json"
        dump_spec(spec, p)
        paths[name] = str(p)
    return paths


def test_kernel_euclid_to_file(specs, tmp_path):
    out = tmp_path / "k.csv"
    assert main(["kernel", "--spec", specs["ou"], "--xa", "1", "--t", "1", "--output", str(out), *GRID]) == 0
    f = read_field_csv(out)
    np.testing.assert_allclose(f.values, cf.ou_kernel(1.0, 0.5, f.grid.nodes, 1.0, 1.0), rtol=1e-12, atol=1e-300)


def test_kernel_continued_matches_euclid(specs, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["kernel", "--spec", specs["harmonic"], "--continued", "--tau", "0.7", "--output", str(a), *GRID]) == 0
    assert main(["kernel", "--spec", specs["heuclid"], "--t", "0.7", "--output", str(b), *GRID]) == 0
    np.testing.assert_allclose(read_field_csv(a).values, read_field_csv(b).values, atol=1e-12)


def test_kernel_override_and_stdout(specs, capsys):
    assert main(["kernel", "--spec", specs["harmonic"], "--t", "0.3", "--omega", "2.0", "--n", "5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6  # header plus five nodes
    x, re, im = map(float, lines[2].split(","))
    want = complex(cf.quantum_harmonic_kernel(cf.Harmonic(1.0, 1.0, 2.0), x, 0.0, 0.3))
    assert complex(re, im) == pytest.approx(want, rel=1e-12)
    assert main(["kernel", "--spec", specs["harmonic"], "--t", "0.3", "--eta", "2.0"]) == 2


def test_kernel_caustic_is_numerical_failure(specs, capsys):
    assert main(["kernel", "--spec", specs["harmonic"], "--t", str(math.pi), "--n", "5"]) == 1
    assert "error" in capsys.readouterr().err


def test_kernel_usage_errors(specs, tmp_path):
    assert main(["kernel", "--spec", str(tmp_path / "missing.json"), "--t", "1"]) == 2
    assert main(["kernel", "--spec", specs["ou"]]) == 2
    assert main(["kernel", "--spec", specs["ou"], "--continued", "--tau", "1"]) == 2
    assert main(["kernel", "--t", "1"]) == 2
    assert main(["nonsense"]) == 2


def test_output_env_dir(specs, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["kernel", "--spec", specs["brown"], "--t", "1", *GRID]) == 0
    assert (tmp_path / "env" / "kernel.csv").exists()


@pytest.mark.parametrize("engine,spec", [("lattice", "ou"), ("cn", "ou"), ("cn", "smol"), ("splitstep", "harmonic")])
def test_propagate_engines(engine, spec, specs, tmp_path):
    d = tmp_path / engine
    args = ["propagate", "--spec", specs[spec], "--engine", engine, "--x0", "1", "--t-final", "0.2",
            "--dt", "0.01", "--snapshot-every", "5", "--output-dir", str(d), *GRID]
    assert main(args) == 0
    rep = json.loads((d / "report.json").read_text())
    assert rep["engine"] == engine
    final = read_field_csv(d / "final.csv")
    if engine == "splitstep":
        assert rep["norm"] == pytest.approx(1.0, abs=1e-10)
    elif engine == "cn":
        assert abs(rep["mass_drift"]) < 1e-12
        assert len(list(d.glob("snapshot_*.csv"))) == 4
    else:
        assert rep["mass"] == pytest.approx(1.0, abs=1e-6)
        assert len(list(d.glob("snapshot_*.csv"))) == 3
    assert final.grid.n == 321


def test_propagate_from_init_file(specs, tmp_path):
    init = tmp_path / "init.csv"
    assert main(["kernel", "--spec", specs["brown"], "--t", "0.1", "--output", str(init), *GRID]) == 0
    d = tmp_path / "run"
    assert main(["propagate", "--spec", specs["brown"], "--engine", "cn", "--init", str(init), "--t-final", "0.4",
                 "--dt", "0.001", "--output-dir", str(d), *GRID]) == 0
    got = read_field_csv(d / "final.csv")
    np.testing.assert_allclose(got.values, cf.brown_kernel(1.0, got.grid.nodes, 0.0, 0.5), atol=1e-4)


def test_propagate_usage_errors(specs):
    base = ["propagate", "--t-final", "0.1", *GRID]
    assert main([*base, "--spec", specs["harmonic"], "--engine", "cn", "--x0", "0"]) == 2
    assert main([*base, "--spec", specs["heuclid"], "--engine", "cn", "--x0", "0"]) == 2
    assert main([*base, "--spec", specs["ou"], "--engine", "splitstep", "--x0", "0"]) == 2
    assert main([*base, "--spec", specs["ou"], "--engine", "lattice"]) == 2
    assert main([*base, "--spec", specs["ou"], "--engine", "rk4", "--x0", "0"]) == 2


def test_sample_requires_seed(specs):
    assert main(["sample", "langevin", "--spec", specs["langevin"]]) == 2


def test_sample_langevin_deterministic(specs, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"l{k}.json"
        args = ["sample", "langevin", "--spec", specs["ou"], "--seed", "3", "--y0", "1", "--n-paths", "500",
                "--n-steps", "50", "--record-every", "25", "--output", str(out)]
        assert main(args) == 0
        outs.append(out.read_text())
    assert outs[0] == outs[1]
    d = json.loads(outs[0])
    assert [r["step"] for r in d["moments"]] == [25, 50]
    assert d["seed"] == 3


def test_sample_paths_csv(specs, tmp_path):
    p = tmp_path / "paths.csv"
    assert main(["sample", "langevin", "--spec", specs["smol"], "--seed", "1", "--n-paths", "3", "--n-steps", "4",
                 "--paths-csv", str(p), "--output", str(tmp_path / "m.json")]) == 0
    assert p.read_text().splitlines()[0] == "path_id,step,x"


def test_sample_feynman_kac(specs, capsys):
    assert main(["sample", "feynman-kac", "--spec", specs["brown"], "--seed", "1", "--xa", "0.2", "--xb", "-0.1",
                 "--tau", "0.5", "--n-steps", "10", "--n-samples", "20"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["value"] == pytest.approx(float(cf.brown_kernel(1.0, -0.1, 0.2, 0.5)))
    assert main(["sample", "feynman-kac", "--spec", specs["ou"], "--seed", "1"]) == 2


def test_partition(capsys):
    assert main(["partition", "--mu", "1", "--omega", "1", "--beta-hbar", "2", "--n", "2001"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["error"] < 1e-6
    assert main(["partition", "--mu", "1", "--omega", "1", "--beta-hbar", "2", "--method", "lattice",
                 "--n-slices", "20", "40", *GRID]) == 0
    d = json.loads(capsys.readouterr().out)
    assert len(d["table"]) == 2 and d["table"][1]["order"] > 0.85


def test_verify(tmp_path, capsys):
    assert main(["verify", "--list"]) == 0
    assert len(capsys.readouterr().out.split()) == 12
    assert main(["verify", "--scenario", "limit-identities", "--scenario", "velocity-discrepancy",
                 "--output-dir", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [json.loads(s)["scenario"] for s in lines] == ["limit-identities", "velocity-discrepancy"]
    assert (tmp_path / "limit-identities.json").exists()
    assert main(["verify", "--scenario", "normalization-positivity"]) == 1
    assert main(["verify", "--scenario", "bogus"]) == 2
    assert main(["verify"]) == 2
