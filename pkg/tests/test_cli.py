import csv
import io
import json

import numpy as np
import pytest

from weakspacing import cli, validate
from weakspacing.fredholm import log_det_with_t_derivs, spacing_curve


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_cdf_gaudin_mehta(capsys):
    code, out, _ = run(["cdf", "--sigma", "0", "--smax", "3", "--ds", "0.5"], capsys)
    header, data = read_csv(out)
    assert code == 0 and header == ["s", "cdf", "density"]
    assert data.shape == (7, 3) and data[0, 1] == 0.0 and np.all(np.diff(data[:, 1]) > 0)


def test_cdf_poisson(capsys):
    _, out, _ = run(["cdf", "--poisson", "--smax", "2", "--ds", "0.25"], capsys)
    _, data = read_csv(out)
    assert np.allclose(data[:, 1], -np.expm1(-data[:, 0]), rtol=0, atol=1e-16)


def test_cdf_full_precision(tmp_path, capsys):
    path = tmp_path / "c.csv"
    run(["cdf", "--sigma", "1", "--smax", "1", "--ds", "0.5", "--out", str(path)], capsys)
    raw = path.read_bytes()
    assert raw.endswith(b"\r\n")
    _, data = read_csv(raw.decode())
    curve = spacing_curve(1.0, np.array([0.0, 0.5, 1.0]), 80)
    assert np.array_equal(data[:, 1], curve.cdf) and np.array_equal(data[:, 2], curve.density)


def test_cdf_sweep_ordered(capsys):
    curves = []
    for sigma in ("0.1", "0.5", "1", "2"):
        _, out, _ = run(["cdf", "--sigma", sigma, "--smax", "0.6", "--ds", "0.1"], capsys)
        curves.append(read_csv(out)[1][:, 1])
    _, out, _ = run(["cdf", "--sigma", "0", "--smax", "0.6", "--ds", "0.1"], capsys)
    f1 = read_csv(out)[1][:, 1]
    f0 = -np.expm1(-np.arange(0, 0.61, 0.1))
    stack = np.vstack([f1, *curves, f0])
    assert np.all(np.diff(stack, axis=0) >= -1e-9)
    assert all(np.all(np.diff(c) >= 0) for c in curves)


def test_cdf_json_sorted(capsys):
    _, out, _ = run(["cdf", "--sigma", "1", "--smax", "0.2", "--ds", "0.1", "--format", "json"], capsys)
    records = json.loads(out)
    assert len(records) == 3 and list(records[0]) == ["cdf", "density", "s"]


def test_cdf_usage_errors(capsys):
    assert run(["cdf"], capsys)[0] == 2
    assert run(["cdf", "--sigma", "-1"], capsys)[0] == 2
    assert run(["cdf", "--sigma", "1", "--ds", "0"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["cdf", "--sigma", "abc"])
    assert exc.value.code == 2


def test_cdf_io_error(capsys):
    code, _, err = run(["cdf", "--sigma", "1", "--out", "/nonexistent/dir/x.csv"], capsys)
    assert code == 1 and "/nonexistent/dir/x.csv" in err


def test_painleve_columns_agree(capsys):
    code, out, _ = run(["painleve", "--alpha", "1", "--tmax", "1"], capsys)
    header, data = read_csv(out)
    assert code == 0 and header == ["t", "logD_evolve", "logD_integral", "residual"]
    assert np.max(np.abs(data[:, 1] - data[:, 2])) < 1e-6
    assert abs(data[-1, 0] - 1.0) < 1e-12


def test_painleve_point_mass(capsys):
    code, out, _ = run(["painleve", "--point-mass", "--tmax", "1"], capsys)
    _, data = read_csv(out)
    assert code == 0 and data[-1, 3] < 1e-5


def test_painleve_sigma_bridge(capsys):
    code, out, _ = run(["painleve", "--sigma", "1", "--tmax", "1", "--ds", "0.25"], capsys)
    header, data = read_csv(out)
    assert code == 0 and header == ["t", "logD_evolve", "logG_nystrom"]
    assert np.max(np.abs(data[:, 1] - data[:, 2])) < 1e-6
    for t, ref in zip(data[:, 0], data[:, 2]):
        assert ref == log_det_with_t_derivs(1.0, t).log_g


def test_painleve_usage(capsys):
    assert run(["painleve"], capsys)[0] == 2
    assert run(["painleve", "--alpha", "1", "--tmax", "9"], capsys)[0] == 2


def test_sample_deterministic(tmp_path, capsys):
    outs = []
    for tag in ("a", "b"):
        path = tmp_path / f"{tag}.csv"
        spectra = tmp_path / f"{tag}_spec.csv"
        summary = tmp_path / f"{tag}.json"
        code, _, _ = run(["sample", "--n", "60", "--tau", "0", "--reps", "40", "--seed", "3",
                          "--out", str(path), "--spectra", str(spectra), "--summary", str(summary)], capsys)
        assert code == 0
        outs.append((path.read_bytes(), spectra.read_bytes(), summary.read_bytes()))
    assert outs[0] == outs[1]
    info = json.loads(outs[0][2])
    assert info["params"]["seed"] == 3 and info["params"]["n"] == 60 and "ks_vs_poisson" in info


def test_sample_usage(capsys):
    assert run(["sample", "--n", "50"], capsys)[0] == 2
    assert run(["sample", "--n", "50", "--sigma", "1", "--tau", "0.3"], capsys)[0] == 2
    assert run(["sample", "--n", "5", "--sigma", "1"], capsys)[0] == 2


@pytest.mark.slow
def test_sample_weak_summary(capsys):
    code, out, _ = run(["sample", "--n", "200", "--sigma", "1", "--reps", "2000", "--seed", "42"], capsys)
    info = json.loads(out)
    assert code == 0 and info["ks_vs_weak"] < 0.05


@pytest.mark.slow
def test_sample_ginue_summary(capsys):
    code, out, _ = run(["sample", "--n", "200", "--tau", "0", "--reps", "2000", "--seed", "42"], capsys)
    assert code == 0 and json.loads(out)["ks_vs_poisson"] < 0.05


def test_validate_corrupted_tolerance(capsys, monkeypatch):
    # a tolerance no computation can meet must flip the exit code
    monkeypatch.setattr(validate, "CRITERIA", [c for c in validate.CRITERIA if c[0] == 6])
    code, out, _ = run(["validate", "--fast", "--tol", "kernel_identity=0"], capsys)
    assert code == 1 and "[FAIL]" in out
    code, out, _ = run(["validate", "--fast"], capsys)
    assert code == 0 and "[PASS]" in out


def test_validate_fast_skips_monte_carlo(capsys, monkeypatch):
    seen = []
    fake = [(n, f"c{n}", lambda ctx, n=n: (seen.append(n) or 0.0, 1.0, True, "")) for n in range(1, 11)]
    monkeypatch.setattr(validate, "CRITERIA", fake)
    code, out, _ = run(["validate", "--fast"], capsys)
    assert code == 0 and seen == [1, 2, 3, 4, 5, 6, 7]
    assert len([l for l in out.splitlines() if l.startswith("[PASS]")]) == 7


def test_validate_bad_tolerance_key(capsys):
    assert run(["validate", "--tol", "nope=1"], capsys)[0] == 2
    assert run(["validate", "--tol", "kernel_identity"], capsys)[0] == 2


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "weakspacing", "cdf", "--poisson", "--smax", "0.1", "--ds", "0.1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("s,cdf,density")


def test_no_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
