import json
import os

from click.testing import CliRunner

from kinfront.cli import EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, kinfront, run
from kinfront.io import read_field_csv


def _lines(output):
    # status messages share the stream with the table under CliRunner
    return [line for line in output.splitlines() if line and ": " not in line]


def test_mu_to_stdout():
    result = CliRunner().invoke(kinfront, ["mu", "--t", "1", "--x", "-2:2:5"])
    assert result.exit_code == 0
    lines = _lines(result.output)
    assert lines[0] == "t,x,w,mu,branch"
    assert len(lines) == 6
    assert lines[3] == "1,0,0,0,power_law"


def test_mu_is_the_default_command():
    result = CliRunner().invoke(kinfront, ["--t", "2", "--x", "1"])
    assert result.exit_code == 0
    assert _lines(result.output)[1] == "2,1,0,1.5,power_law"


def test_exit_codes(capsys):
    assert run(["mu", "--t", "1", "--x", "0,0.5"]) == EXIT_OK
    assert run(["mu", "--t", "-1"]) == EXIT_USAGE
    assert run(["front", "--r", "0"]) == EXIT_USAGE
    assert run(["mu", "--nonsense"]) == EXIT_USAGE
    # a three-point oracle grid cannot meet a zero tolerance
    assert run(["mu", "--x", "0.5", "--brute", "--brute-n", "3", "--tol", "0"]) == EXIT_INVARIANT
    err = capsys.readouterr().err
    assert "mu: failed checks: oracle" in err


def test_output_directory_is_reproducible(tmp_path):
    out = str(tmp_path / "phi")
    args = ["phi", "--t", "1", "--x", "-1:1:3", "--v", "0,1", "--out", out]
    assert run(args) == EXIT_OK
    first = {}
    for name in ("phi.csv", "manifest.json"):
        with open(os.path.join(out, name), "rb") as handle:
            first[name] = handle.read()
    assert run(args) == EXIT_OK
    for name, content in first.items():
        with open(os.path.join(out, name), "rb") as handle:
            assert handle.read() == content

    record = json.loads(first["manifest.json"])
    assert record["command"] == "phi"
    assert record["ok"]
    assert record["outputs"] == ["phi.csv"]
    assert [c["name"] for c in record["checks"]] == ["quadratic_bound"]


def test_config_file(tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("t: 2\nx: '0:1:3'\nbogus: 1\n")
    result = CliRunner().invoke(kinfront, ["--config", str(config), "mu"])
    assert result.exit_code == 0
    lines = _lines(result.output)
    assert len(lines) == 4
    assert all(line.startswith("2,") for line in lines[1:])


def test_scheme(tmp_path):
    out = str(tmp_path / "scheme")
    args = ["scheme", "--steps", "4", "--nx", "81", "--x-min", "-4", "--x-max", "4", "--out", out]
    assert run(args) == EXIT_OK
    with open(os.path.join(out, "manifest.json")) as handle:
        record = json.load(handle)
    assert record["results"]["final_time"] == 1.0


def test_hopflax():
    result = CliRunner().invoke(
        kinfront, ["hopflax", "--x", "0,1", "--v", "0,1", "--nx", "61", "--nv", "21"]
    )
    assert result.exit_code == 0
    assert len(_lines(result.output)) == 5


def test_front(tmp_path):
    out = str(tmp_path / "front")
    assert run(["front", "--t", "10:50:5", "--out", out]) == EXIT_OK
    with open(os.path.join(out, "manifest.json")) as handle:
        record = json.load(handle)
    assert abs(record["results"]["exponent"] - 1.5) < 1e-6
    assert {c["name"] for c in record["checks"]} == {"nondecreasing_after_onset", "bounds"}
    with open(os.path.join(out, "front.csv")) as handle:
        assert len(_lines(handle.read())) == 6


def test_pdmp_writes_its_tables(tmp_path):
    out = str(tmp_path / "pdmp")
    code = run(["pdmp", "--epsilon", "0.1", "--n", "5000", "--dump", "10", "--out", out])
    assert code == EXIT_OK
    assert sorted(os.listdir(out)) == ["manifest.json", "rate.csv", "samples.csv"]
    with open(os.path.join(out, "manifest.json")) as handle:
        record = json.load(handle)
    names = {c["name"] for c in record["checks"]}
    assert names == {"jump_mean", "jump_variance", "symmetry", "variance", "stationary_velocity"}
    with open(os.path.join(out, "samples.csv")) as handle:
        assert len(_lines(handle.read())) == 11


def test_kinetic_mass_check():
    result = CliRunner().invoke(
        kinfront, ["kinetic", "--epsilon", "0.2", "--t", "0.2", "--nx", "80", "--nv", "41"]
    )
    assert result.exit_code == 0
    lines = _lines(result.output)
    assert lines[0] == "epsilon,steps,dt,mass_drift,wkb_error,constraint_gap"
    assert lines[1].startswith("0.20000000000000001,4,")


def test_scheme_restarts_from_its_own_datum(tmp_path):
    first, second = str(tmp_path / "dirac"), str(tmp_path / "file")
    args = ["scheme", "--steps", "4", "--nx", "81", "--x-min", "-4", "--x-max", "4"]
    assert run(args + ["--out", first]) == EXIT_OK
    assert {"u0.csv", "mu_n.csv"} <= set(os.listdir(first))
    u0 = read_field_csv(os.path.join(first, "u0.csv"))
    assert u0.has_velocity and u0.x.n_x == 81

    assert run(args + ["--u0", os.path.join(first, "u0.csv"), "--out", second]) == EXIT_OK
    with open(os.path.join(first, "mu_n.csv")) as a, open(os.path.join(second, "mu_n.csv")) as b:
        assert a.read() == b.read()
    with open(os.path.join(second, "manifest.json")) as handle:
        record = json.load(handle)
    assert [c["name"] for c in record["checks"]] == ["nonincreasing"]

    # a position-only field cannot seed the scheme
    assert run(["scheme", "--u0", os.path.join(first, "mu_n.csv")]) == EXIT_USAGE
    assert run(["scheme", "--u0", str(tmp_path / "missing.csv")]) == EXIT_USAGE


def test_hopflax_reads_and_writes_fields(tmp_path):
    datum = str(tmp_path / "dirac")
    args = ["scheme", "--steps", "1", "--nx", "61", "--x-min", "-3", "--x-max", "3"]
    assert run(args + ["--out", datum]) == EXIT_OK

    out = str(tmp_path / "hopflax")
    args = ["hopflax", "--u0", os.path.join(datum, "u0.csv"), "--x", "-1:1:3", "--v", "0:1:3"]
    assert run(args + ["--no-refine", "--out", out]) == EXIT_OK
    u = read_field_csv(os.path.join(out, "u.csv"))
    assert u.values.shape == (3, 3)
    assert u.at(0.0, 0.0) == 0.0

    uneven = str(tmp_path / "uneven")
    assert run(["hopflax", "--x", "0,1,3", "--v", "0", "--no-refine", "--out", uneven]) == EXIT_OK
    assert sorted(os.listdir(uneven)) == ["hopflax.csv", "manifest.json", "u0.csv"]


def test_kinetic_snapshots(tmp_path):
    out = str(tmp_path / "kinetic")
    args = ["kinetic", "--epsilon", "0.2", "--t", "0.2", "--nx", "40", "--nv", "21"]
    assert run(args + ["--snapshot-times", "0.1", "--snapshots", "--out", out]) == EXIT_OK
    names = sorted(name for name in os.listdir(out) if name.startswith("snapshot_"))
    assert len(names) == 3
    with open(os.path.join(out, names[0])) as handle:
        lines = _lines(handle.read())
    assert lines[0] == "x,v,f,u"
    assert len(lines) == 1 + 40 * 21


def test_kinetic_compare_phi():
    result = CliRunner().invoke(
        kinfront,
        ["kinetic", "--epsilon", "0.2", "--t", "0.5", "--nx", "80", "--nv", "41", "--compare-phi"],
    )
    assert result.exit_code == 0
    row = _lines(result.output)[1].split(",")
    assert 0 < float(row[4]) < 10


def test_kinetic_apriori(tmp_path):
    out = str(tmp_path / "apriori")
    args = ["kinetic", "--epsilon", "0.1", "--t", "0.5", "--nx", "160", "--nv", "41"]
    args += ["--datum", "bounded", "--boundary", "periodic", "--apriori", "--out", out]
    assert run(args) == EXIT_OK
    with open(os.path.join(out, "manifest.json")) as handle:
        record = json.load(handle)
    assert [c["name"] for c in record["checks"]] == ["mass_eps_0.1", "apriori_eps_0.1"]
    assert record["config"]["interpolation"] is None


def test_log_interpolation_fails_the_mass_check():
    args = ["kinetic", "--epsilon", "0.2", "--t", "0.5", "--nx", "40", "--nv", "21"]
    args += ["--datum", "bounded", "--boundary", "periodic", "--interpolation", "log"]
    assert run(args) == EXIT_INVARIANT
