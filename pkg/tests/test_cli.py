import io
import subprocess
import sys

import pytest

from twise.base_families import cyclic_family
from twise.cli import main
from twise.combiner import build, plan
from twise.designs import complete_selection, write_selection
from twise.perm_core import read_family, write_family
from twise.verifier import check_uniform


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def cyclic5_file(tmp_path):
    path = tmp_path / "c5.pf"
    with open(path, "w") as fh:
        write_family(cyclic_family(5), fh)
    return path


def test_build_writes_family(tmp_path):
    path = tmp_path / "f.pf"
    code, text = run("build", "4", "3", "--no-catalog", "--out", str(path))
    assert code == 0
    assert "size=24" in text
    lines = path.read_text().splitlines()
    assert lines[0] == "permfamily v1 n=4 size=24"
    assert len(lines) == 25


def test_build_catalog_mobius():
    code, text = run("build", "8", "3", "--catalog")
    assert code == 0
    assert text.splitlines()[0] == "base mobius(7) n=8 t=3 size=336"


def test_build_bad_form(capsys):
    code, _ = run("build", "6", "3")
    assert code == 2
    assert "power of two" in capsys.readouterr().err


def test_build_cap_exceeded(tmp_path, capsys):
    code, _ = run("--cap", "1000", "build", "8", "3", "--no-catalog", "--out", str(tmp_path / "x.pf"))
    assert code == 3
    err = capsys.readouterr().err
    assert "6720" in err and str(3**16) in err


def test_build_stdout():
    code, text = run("build", "2", "3", "--out", "-")
    assert code == 0
    assert "permfamily v1 n=2 size=2\n0 1\n1 0\n" in text


def test_build_with_selection(tmp_path):
    sel = tmp_path / "c4.sel"
    with open(sel, "w") as fh:
        write_selection(complete_selection(4), fh)
    out = tmp_path / "f.pf"
    code, text = run("build", "4", "3", "--selection", str(sel), "--out", str(out))
    assert code == 0 and "selection=custom(6)" in text
    with open(out) as fh:
        assert check_uniform(read_family(fh), 3).passed


def test_verify_pass_and_round_trip(tmp_path):
    path = tmp_path / "f.pf"
    run("build", "4", "3", "--no-catalog", "--out", str(path))
    code, text = run("verify", str(path), "--t", "3")
    assert code == 0
    assert text.startswith("verdict=pass t=3 expected=1/24")
    in_memory = check_uniform(build(plan(4, 3, use_catalog=False)), 3)
    assert text.strip() == in_memory.render()


def test_verify_round_trip_plan_8_3(tmp_path):
    path = tmp_path / "f.pf"
    run("build", "8", "3", "--no-catalog", "--out", str(path))
    code, text = run("verify", str(path), "--t", "3")
    assert code == 0
    assert text.strip() == check_uniform(build(plan(8, 3, use_catalog=False)), 3).render()


def test_verify_fail(cyclic5_file):
    code, text = run("verify", str(cyclic5_file), "--t", "2")
    assert code == 1
    assert "verdict=fail" in text and "witness=0,1->" in text


def test_verify_sampled(cyclic5_file):
    code, text = run("verify", str(cyclic5_file), "--t", "1", "--mode", "sampled", "--samples", "2000", "--seed", "3", "--tol", "0.05")
    assert code == 0 and text.startswith("approximate verdict=pass")
    again = run("verify", str(cyclic5_file), "--t", "1", "--mode", "sampled", "--samples", "2000", "--seed", "3", "--tol", "0.05")
    assert again == (code, text)


def test_verify_malformed_header(tmp_path, capsys):
    path = tmp_path / "bad.pf"
    path.write_text("permfamily v9 n=3 size=1\n0 1 2\n")
    code, _ = run("verify", str(path), "--t", "1")
    assert code == 2
    assert "line 1" in capsys.readouterr().err


def test_verify_bad_body_line(tmp_path, capsys):
    path = tmp_path / "bad.pf"
    path.write_text("permfamily v1 n=3 size=2\n0 1 2\n0 0 2\n")
    code, _ = run("verify", str(path), "--t", "1")
    assert code == 2
    assert "line 3" in capsys.readouterr().err


def test_verify_work_cap(tmp_path):
    path = tmp_path / "f.pf"
    run("build", "8", "3", "--no-catalog", "--out", str(path))
    code, _ = run("--cap", "100", "verify", str(path), "--t", "3")
    assert code == 3


def test_design_command(tmp_path):
    path = tmp_path / "complete_4_2.sel"
    with open(path, "w") as fh:
        write_selection(complete_selection(4), fh)
    code, text = run("design", str(path), "--t", "1")
    assert code == 0
    assert text.splitlines()[0] == "design t=1 lambda=3 verdict=pass"


def test_design_command_fail(tmp_path):
    path = tmp_path / "bad.sel"
    path.write_text("selection v1 v=4 k=2 size=3\n0 1\n0 1\n2 3\n")
    code, text = run("design", str(path), "--t", "1")
    assert code == 1
    assert "witness={2} count=1" in text


def test_bound():
    assert run("bound", "8", "4") == (0, "28\n")
    assert run("bound", "8", "3") == (0, "14\n")


def test_sizes():
    code, text = run("sizes", "--max-m", "3", "--max-l", "2")
    assert code == 0
    assert any(line.split()[4:6] == ["6720", "40320"] for line in text.splitlines())


def test_info():
    code, text = run("info", "8", "3", "--no-catalog")
    assert code == 0
    assert text.splitlines()[0] == "combine n=8 t=3 size=6720 selection=complete(70)"
    assert text.splitlines()[-1] == f"size=6720 bound={3**16}"


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["verify"])
    assert info.value.code == 2


def test_console_script_is_byte_identical():
    cmd = [sys.executable, "-m", "twise.cli", "sizes", "--max-m", "4", "--max-l", "3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and b"6720" in a
