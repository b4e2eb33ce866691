import json
import textwrap

import pytest

from carshift import cli


def write_config(tmp_path, kind, params=None, seed=11):
    lines = ["[experiment]", f"kind = {kind}", f"seed = {seed}", "", "[params]"]
    for key, val in (params or {}).items():
        lines.append(f"{key} = {val}")
    path = tmp_path / "config.ini"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def write_family(tmp_path, lambdas):
    body = "# one exponent per line: Re Im\n"
    body += "".join(f"{l.real} {l.imag}\n" for l in lambdas)
    path = tmp_path / "family.txt"
    path.write_text(body)
    return path.name


def test_list_prints_all_kinds(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    for kind in cli.EXPERIMENTS:
        assert kind in out


def test_missing_config_is_a_config_error(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.ini")]) == 2


def test_unknown_kind_is_a_config_error(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[experiment]\nkind = frobnicate\n")
    assert cli.main(["run", "--config", str(path)]) == 2


def test_bad_parameter_is_a_config_error(tmp_path):
    config = write_config(tmp_path, "car-check", {"modes": "many"})
    assert cli.main(["run", "--config", config, "--out", str(tmp_path)]) == 2


def test_malformed_family_file(tmp_path):
    (tmp_path / "family.txt").write_text("-1.0\n")
    config = write_config(tmp_path, "blaschke", {"family": "family.txt"})
    assert cli.main(["run", "--config", config, "--out", str(tmp_path)]) == 2


def test_car_check_passes_and_writes_reports(tmp_path):
    config = write_config(tmp_path, "car-check", {"modes": 3, "trials": 20})
    assert cli.main(["run", "--config", config, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "car-check.json").read_text())
    assert all(v["pass"] for v in report["verdicts"].values())
    header = (tmp_path / "car-check.csv").read_text().splitlines()[0]
    assert header == "trial,anticomm_ff,anticomm_star,norm_residual"


def test_csv_bytes_deterministic(tmp_path):
    fam = write_family(tmp_path, [-1.0 + 0.0j])
    config = write_config(tmp_path, "blaschke", {"family": fam, "samples": 100})
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", "--config", config, "--out", str(out1)]) == 0
    assert cli.main(["run", "--config", config, "--out", str(out2)]) == 0
    assert (out1 / "blaschke.csv").read_bytes() == (out2 / "blaschke.csv").read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    config = write_config(tmp_path, "car-check", {"modes": 2, "trials": 5}, seed=1)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cli.main(["run", "--config", config, "--out", str(out1)])
    cli.main(["run", "--config", config, "--out", str(out2), "--seed", "99"])
    assert (out1 / "car-check.csv").read_text() != (out2 / "car-check.csv").read_text()
    report = json.loads((out2 / "car-check.json").read_text())
    assert report["seed"] == 99


def test_innerness_diverging_case_still_exits_zero(tmp_path):
    # a diverging trend is a finding, not a failure
    config = write_config(tmp_path, "innerness", {"case": "minus-identity", "nu": 0.3})
    assert cli.main(["run", "--config", config, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "innerness.json").read_text())
    assert report["extra"]["verdict"] == "diverges"


def test_prop2_run(tmp_path):
    fam = write_family(tmp_path, [-1.0 + 0.0j])
    config = write_config(
        tmp_path,
        "prop2",
        {"family": fam, "t": 1.0, "delta_grid": "0.125 0.0625 0.03125 0.015625", "k_max": 24},
    )
    assert cli.main(["run", "--config", config, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "prop2.json").read_text())
    assert abs(report["extra"]["slope"] - 0.5) <= 0.15


def test_comment_and_blank_lines_in_family(tmp_path):
    (tmp_path / "family.txt").write_text(
        textwrap.dedent(
            """\
            # family with a comment and a blank line

            -1.0 0.0   # trailing comment
            """
        )
    )
    config = write_config(tmp_path, "blaschke", {"family": "family.txt", "samples": 50})
    assert cli.main(["run", "--config", config, "--out", str(tmp_path)]) == 0
