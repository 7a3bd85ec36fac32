import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oul.cli_io import config as cfgmod
from oul.cli_io.commands import cmd_covariance, cmd_ness, cmd_spectrum, cmd_verify, report_json
from oul.cli_io.config import parse_config, parse_config_text, serialize_config
from oul.cli_io.main import run
from oul.cli_io.table import ResultTable
from oul.errors import ParseError, ValidationError
from oul.tensor_linalg import solve_lyapunov

ROOT = Path(__file__).resolve().parents[1]
PRESETS = ROOT / "presets"

MINIMAL = 'kind = "classical_ou"\nbeta = [[2.0]]\ndiffusion = [[1.0]]\n'
UNSTABLE = 'kind = "classical_ou"\nbeta = [[-1.0, 0.0], [0.0, 2.0]]\ndiffusion = [[1.0, 0.0], [0.0, 1.0]]\n'


# parsing

def test_minimal_classical_file():
    cfg = parse_config_text(MINIMAL)
    assert cfg.kind == "classical_ou"
    assert cfg.beta == ((2.0,),)
    assert cfg.diffusion == ((1.0,),)
    assert cfg.options.max_order == 12


def test_optical_preset_expands_to_rates():
    cfg = parse_config(PRESETS / "quantum_optical.toml")
    assert cfg.is_quantum and cfg.preset == "quantum_optical"
    rates = sorted(abs(complex(l[0])) ** 2 + abs(complex(p[0])) ** 2 for l, p in cfg.baths)
    np.testing.assert_allclose(rates, [0.4, 2.4], rtol=1e-14)
    loss = sum(abs(complex(l[0])) ** 2 for l, _ in cfg.baths)
    pump = sum(abs(complex(p[0])) ** 2 for _, p in cfg.baths)
    assert loss == pytest.approx(2.4) and pump == pytest.approx(0.4)
    assert cfg.alpha0 == (1.0 + 0.5j,)


def test_non_hermitian_hamiltonian_rejected_with_line():
    text = 'kind = "quadratic_lindblad"\nn_modes = 2\n\nh = [[0.0, 1.0], [0.5, 0.0]]\n'
    with pytest.raises(ValidationError) as info:
        parse_config_text(text)
    assert info.value.field == "h"
    assert info.value.line == 4


def test_syntax_error_reports_line():
    with pytest.raises(ParseError) as info:
        parse_config_text('kind = "classical_ou"\nbeta = [[2.0]] junk\ndiffusion = [[1.0]]\n')
    assert info.value.line == 2


@pytest.mark.parametrize(
    "text, field",
    [
        ('kind = "classical_ou"\nbeta = [[1.0]]\n', "diffusion"),
        ('kind = "classical_ou"\nbeta = [[1.0]]\nsigma = [[1.0]]\ndiffusion = [[1.0]]\n', "sigma"),
        ('kind = "classical_ou"\nbeta = [[1.0, 0.0]]\ndiffusion = [[1.0]]\n', "beta"),
        ('kind = "classical_ou"\nbeta = [[1.0]]\ndiffusion = [[1.0]]\n[options]\nmax_order = 99\n', "options.max_order"),
        ('kind = "classical_ou"\nbeta = [[1.0]]\ndiffusion = [[nan]]\n', "diffusion"),
        ('kind = "magic"\n', "kind"),
        ('preset = "quantum_optical"\nkappa = -1.0\n', "kappa"),
    ],
)
def test_validation_errors(text, field):
    with pytest.raises(ValidationError) as info:
        parse_config_text(text)
    assert info.value.field.startswith(field.split(".")[0])


def _finite_floats(lo=-3.0, hi=3.0):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


@st.composite
def classical_configs(draw):
    n = draw(st.integers(1, 3))
    beta = [[draw(_finite_floats()) for _ in range(n)] for _ in range(n)]
    m = [[draw(_finite_floats()) for _ in range(n)] for _ in range(n)]
    d = [[0.5 * (m[i][j] + m[j][i]) for j in range(n)] for i in range(n)]
    x0 = [draw(_finite_floats()) for _ in range(n)]
    lines = ['kind = "classical_ou"', f"beta = {beta!r}", f"diffusion = {d!r}", "[initial]", f"x0 = {x0!r}"]
    lines.append(f"t = {draw(st.floats(0, 10))!r}")
    lines += ["[options]", f"max_order = {draw(st.integers(0, 60))}", f"seed = {draw(st.integers(0, 2**31))}"]
    return "\n".join(lines) + "\n"


@st.composite
def quantum_configs(draw):
    n = draw(st.integers(1, 2))
    c = lambda: [draw(_finite_floats()), draw(_finite_floats())]
    h = [[None] * n for _ in range(n)]
    for i in range(n):
        h[i][i] = [draw(_finite_floats()), 0.0]
        for j in range(i + 1, n):
            re, im = c()
            h[i][j], h[j][i] = [re, im], [re, -im]
    lines = ['kind = "quadratic_lindblad"', f"n_modes = {n}", f"h = {h!r}"]
    for _ in range(draw(st.integers(0, 3))):
        lines += ["[[baths]]", f"l = {[c() for _ in range(n)]!r}", f"p = {[c() for _ in range(n)]!r}"]
    lines += ["[initial]", f"alpha0 = {[c() for _ in range(n)]!r}"]
    return "\n".join(lines) + "\n"


@given(st.one_of(classical_configs(), quantum_configs()))
def test_config_round_trip(text):
    cfg = parse_config_text(text)
    assert parse_config_text(serialize_config(cfg)) == cfg


def test_preset_round_trip():
    for name in ("quantum_optical.toml", "classical_ou.toml"):
        cfg = parse_config(PRESETS / name)
        assert parse_config_text(serialize_config(cfg)) == cfg


# tables

def test_table_csv_round_trip():
    table = ResultTable(metadata={"command": "test"})
    table.add("x", np.array([0.5, -1.25])).add("z", np.array([1 + 2j, -0.5j])).add("k", np.array([3, 4]))
    meta, cols = ResultTable.read_csv(table.to_csv())
    assert meta == {"command": "test"}
    assert list(cols) == ["x", "z_re", "z_im", "k"]
    np.testing.assert_array_equal(cols["z_im"], [2.0, -0.5])


def test_table_invariants():
    table = ResultTable(metadata={"a": 1})
    table.add("x", [1.0, 2.0])
    with pytest.raises(ValueError):
        table.add("y", [1.0])
    with pytest.raises(ValueError):
        ResultTable().add("x", [1.0]).to_csv()


def test_spectrum_one_dimensional():
    table = cmd_spectrum(parse_config_text(MINIMAL), order=3)
    np.testing.assert_array_equal(table.columns["mu1"], [0, 1, 2, 3])
    np.testing.assert_allclose(table.columns["eigenvalue_re"], [0, -2, -4, -6], atol=1e-14)
    np.testing.assert_allclose(table.columns["eigenvalue_im"], 0, atol=1e-14)
    assert table.metadata["command"] == "spectrum"
    assert len(table.metadata["model_hash"]) == 16


def test_ness_table_integrates_to_one():
    cfg = parse_config(PRESETS / "classical_ou.toml")
    table = cmd_ness(cfg)
    g = np.unique(table.columns["x1"])
    p = table.columns["density"].reshape(len(g), len(g))
    assert np.trapezoid(np.trapezoid(p, g, axis=1), g) == pytest.approx(1.0, abs=1e-4)


def test_quantum_ness_table_integrates_to_one():
    cfg = parse_config(PRESETS / "quantum_optical.toml")
    table = cmd_ness(cfg)
    g = np.unique(table.columns["alpha_re"])
    q = table.columns["density"].reshape(len(g), len(g))
    assert np.trapezoid(np.trapezoid(q, g, axis=1), g) == pytest.approx(1.0, abs=2e-3)


def test_covariance_endpoint_is_stationary():
    cfg = parse_config(PRESETS / "classical_ou.toml")
    beta, d = np.array(cfg.beta), np.array(cfg.diffusion)
    t = 20.0 / np.min(np.linalg.eigvals(beta).real)
    table = cmd_covariance(cfg, t=t, steps=10)
    s_inf = solve_lyapunov(beta, d)
    assert table.columns["t"][-1] == pytest.approx(t)
    for i in range(2):
        for j in range(i, 2):
            assert table.columns[f"sigma_{i + 1}{j + 1}"][-1] == pytest.approx(s_inf[i, j], abs=1e-8)


def test_tables_identical_across_thread_counts(tmp_path, monkeypatch):
    outputs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("OUL_THREADS", threads)
        (tmp_path / threads).mkdir()
        monkeypatch.chdir(tmp_path / threads)
        assert run(["propagate", "--config", str(PRESETS / "classical_ou.toml"), "--out", "prop.csv"]) == 0
        outputs.append(Path("prop.csv").read_bytes())
    assert outputs[0] == outputs[1]


# verify

def test_verify_unstable_model_is_precondition_failure(tmp_path):
    cfg = parse_config_text(UNSTABLE)
    results, code = cmd_verify(cfg, "classical")
    assert code == 2
    assert results[0].number == 0 and not results[0].passed
    assert "Unstable" in results[0].error


def test_verify_report_schema():
    cfg = parse_config_text(UNSTABLE)
    results, _ = cmd_verify(cfg, "classical")
    text = report_json(results, "classical", cfg)
    doc = json.loads(text)
    assert doc["schema"] == 1 and doc["passed"] is False
    assert set(doc["checks"][0]) == {"check", "name", "measured", "bound", "pass", "seconds", "details", "error"}
    assert doc["checks"][0]["measured"] is None
    # one line per check
    assert sum(line.strip().startswith('{"check"') for line in text.splitlines()) == len(results)


def test_verify_unknown_suite():
    with pytest.raises(ValidationError):
        cmd_verify(parse_config_text(MINIMAL), "nope")


def _cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "oul.cli_io.main", *args],
        capture_output=True,
        text=True,
        cwd=ROOT,
        env={**os.environ, **(env or {})},
    )


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('kind = "classical_ou"\nbeta = [[1.0]]\n')
    res = _cli("spectrum", "--config", str(bad))
    assert res.returncode == 2
    assert "diffusion" in res.stderr
    unstable = tmp_path / "unstable.toml"
    unstable.write_text(UNSTABLE)
    res = _cli("verify", "--config", str(unstable), "--suite", "classical")
    assert res.returncode == 2
    assert json.loads(res.stdout)["checks"][0]["check"] == 0
    res = _cli("spectrum", "--config", str(PRESETS / "classical_ou.toml"), "--order", "2")
    assert res.returncode == 0
    assert res.stdout.startswith("# model_hash:")


def test_cli_classical_verify_passes(tmp_path):
    out = tmp_path / "report.json"
    res = _cli("verify", "--config", str(PRESETS / "classical_ou.toml"), "--suite", "classical", "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads(out.read_text())
    assert [c["check"] for c in doc["checks"]] == [1, 2, 3, 4]
    assert res.stderr.count("[PASS]") == 4


@pytest.mark.parametrize("command", ["spectrum", "ness", "eigfun", "covariance", "propagate"])
@pytest.mark.parametrize("preset", ["classical_ou.toml", "quantum_optical.toml"])
def test_cli_commands_write_tables(tmp_path, command, preset):
    out = tmp_path / "out.csv"
    assert run([command, "--config", str(PRESETS / preset), "--out", str(out)]) == 0
    meta, cols = ResultTable.read_csv(out.read_text())
    assert {"model_hash", "tool_version", "command", "seed"} <= set(meta)
    assert all(np.all(np.isfinite(v)) for v in cols.values())
