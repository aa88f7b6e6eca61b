import json
import subprocess
import sys

import pytest

from online_kmedian.cli import main

RUN = ["--max-rows", "120", "--k", "3", "--z", "4"]


def test_run_writes_log_and_verify_accepts_it(tmp_path, synthetic_csv):
    out = tmp_path / "log.csv"
    assert main(["run", "--input", str(synthetic_csv), *RUN, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,cost_p,p,")
    assert len(lines) == 121
    rc = main(["verify", "--input", str(synthetic_csv), *RUN, "--log", str(out), "--replay"])
    assert rc == 0


def test_run_to_stdout(capsys, synthetic_csv):
    assert main(["run", "--input", str(synthetic_csv), "--max-rows", "20", "--k", "2", "--z", "1"]) == 0
    assert capsys.readouterr().out.count("\n") == 21


def test_verify_detects_tampering(tmp_path, synthetic_csv):
    out = tmp_path / "log.csv"
    main(["run", "--input", str(synthetic_csv), *RUN, "--out", str(out)])
    lines = out.read_text().splitlines()
    fields = lines[50].split(",")
    fields[5] = str(int(fields[5]) + 1)  # recourse_total
    lines[50] = ",".join(fields)
    out.write_text("\n".join(lines) + "\n")
    rc = main(["verify", "--input", str(synthetic_csv), *RUN, "--log", str(out)])
    assert rc == 3


def test_oracle_json(tmp_path, capsys):
    pts = tmp_path / "tiny.csv"
    pts.write_text("x\n0\n1\n2\n10\n")
    assert main(["oracle", "--input", str(pts), "--k", "1", "--z", "1"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got == {"opt": 2.1, "medians": [1], "outliers": [3]}


def test_static_f_needs_facilities(tmp_path, synthetic_csv):
    rc = main(["run", "--input", str(synthetic_csv), *RUN, "--setting", "static-f"])
    assert rc == 2


def test_static_f_run(tmp_path, synthetic_csv):
    fac = tmp_path / "fac.csv"
    fac.write_text("\n".join(",".join(str(10 * i + j) for j in range(10)) for i in range(6)) + "\n")
    out = tmp_path / "log.csv"
    rc = main(["run", "--input", str(synthetic_csv), *RUN, "--setting", "static-f",
               "--facilities", str(fac), "--out", str(out)])
    assert rc == 0 and out.exists()


@pytest.mark.parametrize(
    "argv,code",
    [
        (["run"], 1),
        (["run", "--input", "x.csv", "--bogus"], 1),
        (["run", "--input", "x.csv", "--k", "two"], 1),
        (["run", "--input", "/no/such.csv"], 2),
        (["frobnicate"], 1),
    ],
)
def test_exit_codes(argv, code, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == code


def test_bad_parameter_is_usage_error(synthetic_csv):
    assert main(["run", "--input", str(synthetic_csv), "--epsilon", "1.5"]) == 1


def test_module_entry_point(synthetic_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "online_kmedian", "run", "--input", str(synthetic_csv),
         "--max-rows", "15", "--k", "2", "--z", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].split(",")[0] == "t"
