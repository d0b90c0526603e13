import shutil
import subprocess

import pytest

from ilt_lab import cli
from ilt_lab.csvio import read_csv


def write_cfg(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(tmp_path, exp, text, *extra):
    out = tmp_path / "out"
    code = cli.main([exp, "--config", write_cfg(tmp_path, text), "--out", str(out), *extra])
    return code, out


def test_specfun_check_passes(tmp_path):
    code, out = run(tmp_path, "specfun-check", "alpha = 0.25\nm = 1\n")
    assert code == 0
    hdr, rows = read_csv(out / "specfun_check.csv")
    assert hdr[-1] == "ok" and all(r[-1] == "true" for r in rows)
    assert (out / "specfun_check.csv").read_text().startswith("# experiment=specfun-check")


def test_bad_alpha_is_usage_error(tmp_path):
    assert run(tmp_path, "phi", "alpha = 1.5\nm = 1\n")[0] == 2


def test_unknown_key_and_syntax(tmp_path):
    assert run(tmp_path, "phi", "alpha = 0.5\nbogus = 1\n")[0] == 2
    assert run(tmp_path, "phi", "alpha 0.5\n")[0] == 2


def test_missing_config_and_bad_experiment(tmp_path):
    assert cli.main(["phi", "--config", str(tmp_path / "none.cfg")]) == 2
    assert cli.main(["nonsense", "--config", write_cfg(tmp_path, "")]) == 2
    assert cli.main(["phi"]) == 2


def test_grid_parsing():
    assert list(cli.parse_grid("0.5, 1,2")) == [0.5, 1.0, 2.0]
    g = cli.parse_grid("logspace(-1, 1, 3)")
    assert g == pytest.approx([0.1, 1.0, 10.0])
    with pytest.raises(cli.ConfigError):
        cli.parse_grid("logspace(1, 2)")


def test_phi_seventeen_digits(tmp_path):
    code, out = run(tmp_path, "phi", "alpha = 0.5\nm = 2\nlambda_grid = 3\n")
    assert code == 0
    hdr, rows = read_csv(out / "phi.csv")
    assert hdr == ["lambda", "phi_stable", "phi_relativistic", "phi_esscher"]
    v = float(rows[0][1])
    assert repr(v) == repr(float(f"{v:.17g}"))
    assert len(rows[0][1].replace(".", "").replace("e", "").lstrip("0")) >= 15


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("ILT_LAB_OUT", str(tmp_path / "envout"))
    assert cli.main(["phi", "--config", write_cfg(tmp_path, "alpha = 0.5\nm = 1\n")]) == 0
    assert (tmp_path / "envout" / "phi.csv").exists()


def test_dominance_identical_samples(tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("index,value\n" + "".join(f"{i},{(i + 1) / 7.0}\n" for i in range(300)))
    code, out = run(tmp_path, "dominance", f"lower = {f}\nupper = {f}\n")
    assert code == 0
    hdr, rows = read_csv(out / "dominance.csv")
    assert float(rows[0][0]) == 0.0 and rows[0][-1] == "true"


def test_dominance_violation_is_check_failure(tmp_path):
    lo = tmp_path / "lo.csv"
    hi = tmp_path / "hi.csv"
    lo.write_text("index,value\n" + "".join(f"{i},{i + 1000}\n" for i in range(300)))
    hi.write_text("index,value\n" + "".join(f"{i},{i + 1}\n" for i in range(300)))
    assert run(tmp_path, "dominance", f"lower = {lo}\nupper = {hi}\n")[0] == 1


def test_cm_check_rows(tmp_path):
    code, out = run(tmp_path, "cm-check", "alpha = 0.5\nm = 1\n")
    assert code == 0
    hdr, rows = read_csv(out / "cm_check.csv")
    got = {r[0]: (r[2], r[4]) for r in rows}
    assert got["phi_difference_bernstein"] == ("true", "true")
    assert got["phi_difference_literal"] == ("false", "false")


def test_budget_exit_code(tmp_path):
    code, _ = run(tmp_path, "green", "alpha = 0.5\nm = 50\nn_paths = 1000\nmax_time = 10\n")
    assert code == 3


SIM = "alpha = 0.25\nm = 1\nfield = relativistic\nT = 0.05\ndt = 1e-4\nn_paths = 600\n"


def test_simulate_byte_identical(tmp_path):
    outs = []
    for k, w in enumerate(("1", "2", "1")):
        d = tmp_path / f"o{k}"
        assert cli.main(["simulate", "--config", write_cfg(tmp_path, SIM), "--seed", "5",
                         "--workers", w, "--out", str(d)]) == 0
        outs.append({n: (d / n).read_bytes() for n in ("path.csv", "inverse.csv", "local_time.csv")})
    assert outs[0] == outs[1] == outs[2]


@pytest.mark.skipif(shutil.which("ilt-lab") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = write_cfg(tmp_path, "alpha = 0.5\nm = 1\n")
    r = subprocess.run(["ilt-lab", "phi", "--config", cfg, "--out", str(tmp_path)], capture_output=True)
    assert r.returncode == 0
    r = subprocess.run(["ilt-lab", "phi", "--config", cfg, "--seed", "x"], capture_output=True)
    assert r.returncode == 2
