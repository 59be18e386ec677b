import csv
import json

import numpy as np
import pytest

from plapext import cli


def write(path, text):
    path.write_text(text)
    return str(path)


BARRIER_CFG = """\
[operator]
p = 3
n = 2
coefficient = plap

[source]
name = zero

[barrier]
family = lemma1
R = 10
a = 1
f_sup = 0

[radii]
r_min = 0.1
r_max = 10
count = 100
spacing = geom
"""

COUNTER_CFG = """\
[counterexample]
p = 3
n = 2
r_max = 1e6
samples = 200
"""


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    return header, data


def test_barrier_subcommand_writes_closed_form(tmp_path):
    cfg = write(tmp_path / "b.cfg", BARRIER_CFG)
    out = tmp_path / "out"
    assert cli.run("barrier", cfg, out, quiet=True) == 0
    header, data = read_csv(out / "barrier.csv")
    assert header[:2] == ["r", "value"]
    r, v = data[:, 0], data[:, 1]
    assert np.allclose(v, 2.0 * np.sqrt(r), rtol=1e-8)
    assert (out / "manifest.json").exists()


def test_counterexample_subcommand(tmp_path):
    cfg = write(tmp_path / "c.cfg", COUNTER_CFG)
    out = tmp_path / "out"
    assert cli.run("counterexample", cfg, out, quiet=True) == 0
    rep = json.loads((out / "counterexample.json").read_text())
    assert rep["has_limit"] is False
    assert rep["oscillation"] == 2.0
    assert rep["ratio_variation"] < 10.0


def test_solve_radial_exterior(tmp_path):
    cfg = write(tmp_path / "e.cfg", """\
[operator]
p = 3
n = 2

[source]
name = powerdecay:1.0:1.0

[geometry]
R_in = 1.0
R_out = inf

[boundary]
u_in = 0.0
""")
    out = tmp_path / "out"
    assert cli.run("solve-radial", cfg, out, quiet=True) == 0
    summary = json.loads((out / "summary.json").read_text())
    # the saturating closed form: limit = sqrt(2) from u_in = 0 at R_in = 1
    assert summary["limit_at_infinity"] == pytest.approx(np.sqrt(2.0),
                                                         abs=1e-8)


def test_solve_annulus_2d(tmp_path):
    cfg = write(tmp_path / "a.cfg", """\
[operator]
p = 3
n = 2

[source]
name = powerdecay:0.5:1.0

[geometry]
R_in = 1.0
R_out = 2.0

[boundary]
u_in = 1.0
u_out = 0.0

[mesh]
dim = 2
radial = 12
angular = 12
""")
    out = tmp_path / "out"
    assert cli.run("solve-annulus", cfg, out, quiet=True) == 0
    header, data = read_csv(out / "solution.csv")
    assert header == ["r", "theta", "u"]
    assert np.max(np.abs(data[:, 2])) <= 1.0 + 1e-9


def test_rearrange_subcommand(tmp_path):
    cfg = write(tmp_path / "r.cfg", """\
[rearrange]
n = 2
values = 3, 1, 2
measures = 1, 1, 1
""")
    out = tmp_path / "out"
    assert cli.run("rearrange", cfg, out, quiet=True) == 0
    _, data = read_csv(out / "decreasing.csv")
    assert list(data[:, 1]) == [3.0, 2.0, 1.0]


def test_missing_config_gives_config_error(tmp_path):
    assert cli.run("barrier", tmp_path / "missing.cfg", tmp_path / "o") == 2


def test_bad_section_gives_config_error(tmp_path):
    cfg = write(tmp_path / "bad.cfg", "[operator]\np = 3\nn = 2\n")
    assert cli.run("barrier", cfg, tmp_path / "o", quiet=True) == 2


def test_unknown_subcommand_gives_config_error(tmp_path):
    cfg = write(tmp_path / "b.cfg", BARRIER_CFG)
    assert cli.run("frobnicate", cfg, tmp_path / "o", quiet=True) == 2


def test_invalid_operator_gives_config_error(tmp_path):
    cfg = write(tmp_path / "b.cfg",
                BARRIER_CFG.replace("p = 3", "p = 0.5"))
    assert cli.run("barrier", cfg, tmp_path / "o", quiet=True) == 2


def test_nonconvergence_exit_code(tmp_path):
    cfg = write(tmp_path / "a.cfg", """\
[operator]
p = 4
n = 2

[source]
name = powerdecay:1.0:1.0

[geometry]
R_in = 1.0
R_out = 2.0

[boundary]
u_in = 1.0
u_out = 0.0

[mesh]
dim = 2
radial = 10
angular = 10

[solver]
max_iter = 1
tol = 1e-14
""")
    assert cli.run("solve-annulus", cfg, tmp_path / "o", quiet=True) == 3


def test_manifest_has_checksums_and_versions(tmp_path):
    cfg = write(tmp_path / "c.cfg", COUNTER_CFG)
    out = tmp_path / "out"
    cli.run("counterexample", cfg, out, quiet=True)
    man = json.loads((out / "manifest.json").read_text())
    assert "versions" in man and "artifacts" in man
    assert "counterexample.json" in man["artifacts"]
    assert len(man["artifacts"]["counterexample.json"]) == 64  # sha256 hex


def test_single_subcommand_determinism(tmp_path):
    cfg = write(tmp_path / "c.cfg", COUNTER_CFG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    cli.run("counterexample", cfg, out1, quiet=True)
    cli.run("counterexample", cfg, out2, quiet=True)
    assert (out1 / "counterexample.json").read_bytes() \
        == (out2 / "counterexample.json").read_bytes()


def test_main_argparse_roundtrip(tmp_path):
    cfg = write(tmp_path / "c.cfg", COUNTER_CFG)
    code = cli.main(["counterexample", "--config", cfg,
                     "--out", str(tmp_path / "o"), "--quiet"])
    assert code == 0
