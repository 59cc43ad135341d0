import json

import pytest

from lolab.cli import main
from lolab.corpus import planted


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rho_examples(tmp_path, capsys):
    code, out, _ = run(["rho", write(tmp_path, "a.json", {"values": [1, 2, 3], "eta": {"label": "bernoulli"}})], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["rho"] == "1/4"
    assert "constants" in rep and "version" in rep
    code, out, _ = run(["rho", write(tmp_path, "b.json", {"values": [1], "eta": {"label": "lazy", "mu": "1/2"}})], capsys)
    rep = json.loads(out)
    assert rep["rho"] == "1/2" and rep["argmax"] == 0
    code, _, err = run(["rho", write(tmp_path, "c.json", "{oops")], capsys)
    assert code == 2 and json.loads(err)["exit_code"] == 2


def test_invert_examples(tmp_path, capsys):
    inst = planted(150, 1, seed=3)
    path = write(tmp_path, "p.json", {"values": list(inst.values)})
    code, out, _ = run(["invert", path, "--epsilon", "0.1", "--C", str(inst.C_invert)], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["covered_count"] >= 0.9 * 150
    path = write(tmp_path, "d.json", {"values": list(range(1, 101))})
    code, out, _ = run(["invert", path, "--epsilon", "0.1", "--C", "1.5"], capsys)
    rep = json.loads(out)
    assert rep["size"] >= rep["covered_count"]
    with pytest.raises(SystemExit) as exc:
        main(["invert", path, "--epsilon", "0.1", "--n-prime", "10"])
    assert exc.value.code == 2


def test_budget_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, "d.json", {"values": list(range(1, 101))})
    code, _, err = run(["invert", path, "--n-prime", "2"], capsys)
    assert code == 2 and json.loads(err)["stage"] == "precondition"


def test_bound_and_net_count(tmp_path, capsys):
    code, out, _ = run(["bound", write(tmp_path, "a.json", {"values": [1, 2, 3]})], capsys)
    assert code == 0 and json.loads(out)["dominance_ok"]
    code, out, _ = run(["net-count", "--n", "16", "--beta", "1/2", "--rho", "1/4", "--epsilon", "1/3"], capsys)
    assert code == 0 and json.loads(out)["exceptional_count"] == "31"
    code, _, err = run(["net-count", "--n", "16", "--beta", "1/2", "--rho", "2", "--epsilon", "1/3"], capsys)
    assert code == 2


def test_smallball(tmp_path, capsys):
    n = 16
    inst = {"vectors": [1.0] * n, "beta": 0.1, "seed": 5, "trials": 100_000}
    code, out, _ = run(["smallball", write(tmp_path, "s.json", inst), "--bound"], capsys)
    rep = json.loads(out)
    from math import comb

    exact = comb(n, n // 2) / 2**n
    est = rep["estimate"]
    assert code == 0 and abs(est["rho"] - exact) <= 3 * est["se"]
    assert rep["bound"]["dominates_estimate"]
    del inst["seed"]
    code, _, _ = run(["smallball", write(tmp_path, "t.json", inst)], capsys)
    assert code == 2


def test_smallball_noise_exit_code(tmp_path, capsys):
    inst = {"vectors": [1.0] * 16, "beta": 0.1, "seed": 5, "trials": 10_000, "C": 0.587}  # 16^-C sits on rho = 0.196
    code, _, err = run(["smallball", write(tmp_path, "s.json", inst), "--invert"], capsys)
    assert code == 3 and json.loads(err)["error"] == "MCTooNoisy"


def test_verify_forward_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, "cfg.json", {"name": "fwd", "seed": 1, "suites": ["stanley", "erdos"]})
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    code, out, _ = run(["verify-forward", cfg, "--csv", a], capsys)
    assert code == 0
    summary = json.loads(out)["suites"]
    assert summary["stanley"]["failures"] == 0 and summary["erdos"]["instances"] == 500
    run(["verify-forward", cfg, "--csv", b], capsys)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = write(tmp_path, "cfg.json", {"name": "x", "colour": "red"})
    code, _, err = run(["verify-forward", cfg], capsys)
    assert code == 2


def test_rho_output_is_reproducible(tmp_path, capsys):
    path = write(tmp_path, "a.json", {"values": [3, 5, 9, 9, 12]})
    o1, o2 = str(tmp_path / "o1.json"), str(tmp_path / "o2.json")
    run(["rho", path, "--output", o1], capsys)
    run(["rho", path, "--output", o2], capsys)
    assert open(o1, "rb").read() == open(o2, "rb").read()
