import json

import pytest

from syzlab.cli import CACHE_ENV, DiskCache, main
from syzlab.sections import ProjLineSystem, export_system

RUN = ["--jobs", "1", "--field", "rational"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_betti_twisted_cubic(capsys):
    code, out, _ = run(capsys, "betti", "--system", "projline", "--b", "0", "--d", "3", *RUN)
    assert code == 0
    assert any(line.split() == ["1:", ".", "3", "2", "."] for line in out.splitlines())


def test_betti_formats_round_trip(capsys):
    code, out, _ = run(capsys, "betti", "--d", "3", "--format", "json", *RUN)
    doc = json.loads(out)
    assert code == 0 and doc["table"][1][:3] == [0, 3, 2]
    code, out, _ = run(capsys, "betti", "--d", "3", "--format", "csv", *RUN)
    assert out.splitlines()[2] == "1,0,3,2,0"


def test_missing_d_is_an_input_error(capsys):
    code, _, err = run(capsys, "betti", "--system", "projline", *RUN)
    assert code == 1 and "--d is required" in err


def test_bad_flags_exit_one(capsys):
    assert run(capsys, "betti", "--d", "2", "--field", "reals")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--p", "1", "--d-range", "5..2"])
    assert exc.value.code == 1
    capsys.readouterr()


def test_budget_exits_two(capsys):
    code, out, _ = run(capsys, "betti", "--d", "8", "--pmax", "4", "--qmax", "1", "--budget", "50", *RUN)
    assert code == 2 and "SizeBudgetExceeded" in out
    assert run(capsys, "mh1", "--d", "8", "--p", "3", "--budget", "50", *RUN)[0] == 2


def test_jets_check_and_search(capsys):
    code, out, _ = run(capsys, "jets", "check", "--system", "projline", "--b", "1", "0 + 1 + 2")
    assert code == 0 and "rank 2 of 3" in out and "FAILS" in out
    code, out, _ = run(capsys, "jets", "check", "--system", "projline", "--b", "2", "0^3")
    assert "rank 3 of 3" in out and "OK" in out
    code, out, _ = run(capsys, "jets", "search", "--system", "projline", "--b", "1", "--p", "2", "--format", "json")
    doc = json.loads(out)
    assert doc["certified"] and doc["verdict"] == "NOT_JET_VERY_AMPLE" and doc["reduced"]
    assert run(capsys, "jets", "check", "--b", "1", "1 + 1")[0] == 1


def test_toric_jets_search(capsys):
    code, out, _ = run(capsys, "jets", "search", "--system", "toric", "--pb", "0,0;1,0;0,1;1,1",
                       "--pa", "0,0;1,0;0,1;1,1", "--p", "2", "--seed", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["cycle"] and doc["certified"] and doc["method"] == "search"


def test_sweep_and_mh1(capsys):
    code, out, _ = run(capsys, "sweep", "--system", "projline", "--b", "1", "--p", "2", "--d-range", "2..6", *RUN)
    assert code == 0 and "prediction: K_{2,1} NONVANISHING" in out and "status: MATCH" in out
    code, out, _ = run(capsys, "sweep", "--b", "1", "--p", "2", "--d-range", "2..4", "--format", "csv", *RUN)
    assert out.splitlines()[0] == "d,r_d,kp1,mh1"
    code, out, _ = run(capsys, "mh1", "--system", "projline", "--b", "0", "--d", "3", "--p", "1", *RUN)
    assert (code, out) == (0, "9\n")
    code, out, _ = run(capsys, "mh1", "--b", "2", "--d", "4", "--p", "1", "--implication", *RUN)
    assert "implication: HOLDS" in out
    assert run(capsys, "mh1", "--system", "elliptic", "--b", "0", "--d", "3", "--p", "1", *RUN)[0] == 1


def test_regularity_and_duality(capsys):
    code, out, _ = run(capsys, "regularity", "--b", "2", "--d", "5", *RUN)
    assert code == 0 and out.strip().endswith("OK")
    code, out, _ = run(capsys, "duality", "--system", "elliptic", "--p", "1", "--d-range", "4..5", "--format", "json", *RUN)
    assert code == 0 and json.loads(out)["ok"]


def test_validate_file_systems(capsys, tmp_path):
    doc = export_system(ProjLineSystem(1, 2), 0, 2, name="p12")
    good = tmp_path / "good.json"
    good.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", "--system", "file", "--path", str(good))
    assert code == 0 and out.strip().endswith("OK")
    for e in doc["mult"]:
        if e[:3] == [0, 1, 0]:
            e[3] = 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", "--system", "file", "--path", str(bad))
    assert code == 1 and "grade 0" in out and "v1=" in out
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run(capsys, "validate", "--system", "file", "--path", str(broken))[0] == 1
    assert run(capsys, "betti", "--system", "file", *RUN)[0] == 1


def test_cache_round_trip(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "env-cache"))
    argv = ["betti", "--b", "1", "--d", "3", "--format", "json", "--cache", str(tmp_path / "c"), *RUN]
    cold = run(capsys, *argv)[1]
    assert list((tmp_path / "c").glob("*.json"))
    assert run(capsys, *argv)[1] == cold
    run(capsys, "betti", "--d", "2", *RUN)
    assert list((tmp_path / "env-cache").glob("*.json"))
    cache = DiskCache(tmp_path / "k")
    cache.put("a", {"x": 1})
    assert cache.get("a") == {"x": 1} and cache.get("b") is None
