"""Saved-run directories: manifest/energy round-trips and ledger re-checks.

The tamper tests edit stored artifacts directly; check_energy must refuse
each corruption with a message naming what broke.
"""

import json

import numpy as np
import pytest

from diskflow.body import StaticPath
from diskflow.compressible import SolverConfig, run
from diskflow.constitutive import FluidParams
from diskflow.grid import GridSpec
from diskflow.incompressible import ReferenceConfig, run_reference
from diskflow.runio import (ENERGY_HEADER, EnergyCheckError, check_energy,
                            config_digest, config_echo, load_run,
                            save_reference, save_run)


@pytest.fixture(scope="module")
def small_run():
    cfg = SolverConfig(params=FluidParams(eps=0.1), grid=GridSpec(64, 64),
                       path=StaticPath(point=(0.5, 0.5)),
                       t_end=0.02, snapshots=3)
    return run(cfg)


def _tamper_energy(run_dir, row, col, new_value):
    path = run_dir / "energy.csv"
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    parts = lines[1 + row].split(",")
    parts[col] = "%.17g" % new_value
    lines[1 + row] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_save_load_roundtrip(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "run")
    loaded = load_run(out, fields=True)

    man = loaded.manifest
    assert man["times"] == [float(t) for t in small_run.times]
    assert man["steps"] == small_run.steps
    assert man["config_sha256"] == config_digest(config_echo(small_run.config))
    assert len(man["body_path"]) == len(small_run.times)
    assert man["body_path_columns"][0] == "t"

    # %.17g preserves float64 exactly
    for k, name in enumerate(("t", "kinetic", "pressure_energy",
                              "dissipation_accum", "total", "mass")):
        col = loaded.energy[name]
        assert col.shape == (len(small_run.times),)
    assert np.array_equal(loaded.energy["kinetic"], small_run.kinetic)
    assert np.array_equal(loaded.energy["mass"], small_run.mass)

    for k in range(len(small_run.times)):
        assert np.array_equal(loaded.densities[k].values,
                              small_run.densities[k].values)
        assert np.array_equal(loaded.velocities[k].u, small_run.velocities[k].u)
        assert np.array_equal(loaded.velocities[k].v, small_run.velocities[k].v)


def test_save_without_fields(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "lean", fields=False)
    loaded = load_run(out, fields=True)
    assert "density_fields" not in loaded.manifest["artifacts"]
    assert loaded.densities is None
    assert not list(out.glob("*.bin"))


def test_load_errors(small_run, tmp_path):
    with pytest.raises(FileNotFoundError, match="manifest.json"):
        load_run(tmp_path / "nowhere")
    out = save_run(small_run, tmp_path / "vnext", fields=False)
    man = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    man["format_version"] = 99
    (out / "manifest.json").write_text(json.dumps(man), encoding="utf-8")
    with pytest.raises(ValueError, match="unsupported run format"):
        load_run(out)


def test_check_energy_accepts_honest_run(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "ok", fields=False)
    report = check_energy(out)
    assert report["violation"] <= report["budget"]
    assert report["mass_drift"] <= 1.0e-12
    assert report["dt_max"] == small_run.dt_max


def test_check_energy_bad_header(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "hdr", fields=False)
    path = out / "energy.csv"
    text = path.read_text(encoding="utf-8")
    path.write_text(text.replace(ENERGY_HEADER, "t,stuff"), encoding="utf-8")
    with pytest.raises(EnergyCheckError, match="header"):
        check_energy(out)


def test_check_energy_total_mismatch(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "tot", fields=False)
    loaded = load_run(out)
    _tamper_energy(out, 2, 4, loaded.energy["total"][2] + 1.0e-6)
    with pytest.raises(EnergyCheckError, match="parts"):
        check_energy(out)


def test_check_energy_mass_drift(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "mass", fields=False)
    loaded = load_run(out)
    _tamper_energy(out, 1, 5, loaded.energy["mass"][1] * (1.0 + 1.0e-6))
    with pytest.raises(EnergyCheckError, match="mass drift"):
        check_energy(out)


def test_check_energy_injected_energy(small_run, tmp_path):
    # raise kinetic and total together so only the budget check can notice
    out = save_run(small_run, tmp_path / "inject", fields=False)
    loaded = load_run(out)
    _tamper_energy(out, 2, 1, loaded.energy["kinetic"][2] + 1.0)
    _tamper_energy(out, 2, 4, loaded.energy["total"][2] + 1.0)
    with pytest.raises(EnergyCheckError, match="budget"):
        check_energy(out)


def test_check_energy_work_ledger_length(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "work", fields=False)
    man = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    man["work_accum"] = man["work_accum"][:-1]
    (out / "manifest.json").write_text(json.dumps(man), encoding="utf-8")
    with pytest.raises(EnergyCheckError, match="work ledger"):
        check_energy(out)


def test_check_energy_degenerate_ledgers(small_run, tmp_path):
    out = save_run(small_run, tmp_path / "short", fields=False)
    path = out / "energy.csv"
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    path.write_text("\n".join(lines[:2]) + "\n", encoding="utf-8")
    with pytest.raises(EnergyCheckError, match="rows"):
        check_energy(out)
    path.write_text("\n".join(lines[:2]) + "\n1,2,3\n", encoding="utf-8")
    with pytest.raises(EnergyCheckError, match="ragged"):
        check_energy(out)


def test_reference_artifacts_check_clean(tmp_path):
    cfg = ReferenceConfig(grid=GridSpec(64, 64), t_end=0.02, snapshots=3)
    ref = run_reference(cfg)
    out = save_reference(ref, tmp_path / "ref")
    report = check_energy(out)
    assert report["violation"] == 0.0
    loaded = load_run(out, fields=True)
    assert np.array_equal(loaded.energy["kinetic"], ref.kinetic)
    assert np.array_equal(loaded.energy["total"], ref.kinetic)
    assert loaded.manifest["body_path"] == []
    assert np.array_equal(loaded.velocities[0].u, ref.velocities[0].u)
    assert loaded.densities is None


def test_config_digest_tracks_content(small_run):
    echo = config_echo(small_run.config)
    assert config_digest(echo) == config_digest(config_echo(small_run.config))
    other = json.loads(json.dumps(echo))
    other["fluid"]["eps"] = 0.05
    assert config_digest(other) != config_digest(echo)
