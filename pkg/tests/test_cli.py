"""Command-line interface tests: exit codes, file outputs, report format."""

import json

import numpy as np
import pytest

from kontract.cli import main


def write_csv(path, a):
    np.savetxt(path, np.asarray(a, dtype=float), delimiter=",")
    return str(path)


@pytest.fixture
def example_coupling(tmp_path):
    return write_csv(tmp_path / "R.csv", 2.0 * np.array([[-1.0, 1.0], [1.0, -1.0]]))


def test_compound_add_identity_gives_scaled_identity(tmp_path, capsys):
    i4 = write_csv(tmp_path / "I4.csv", np.eye(4))
    out = tmp_path / "out.csv"
    assert main(["compound", "--k", "2", "--mode", "add", "--in", i4, "--out", str(out)]) == 0
    got = np.loadtxt(out, delimiter=",")
    assert np.array_equal(got, 2.0 * np.eye(6))
    # no --out: CSV goes to stdout
    assert main(["compound", "--k", "2", "--mode", "mult", "--in", i4]) == 0
    text = capsys.readouterr().out
    assert np.array_equal(np.loadtxt(text.splitlines(), delimiter=","), np.eye(6))


def test_kron_product_and_bridge(tmp_path, capsys):
    a = write_csv(tmp_path / "a.csv", [[1.0, 2.0], [3.0, 4.0]])
    b = write_csv(tmp_path / "b.csv", [[0.0, 1.0], [1.0, 0.0]])
    assert main(["kron", "--op", "product", "--a", a, "--b", b]) == 0
    got = np.loadtxt(capsys.readouterr().out.splitlines(), delimiter=",")
    assert np.array_equal(got, np.kron([[1.0, 2.0], [3.0, 4.0]], [[0.0, 1.0], [1.0, 0.0]]))
    out_l, out_m = tmp_path / "L.csv", tmp_path / "M.csv"
    rc = main(["kron", "--op", "bridge", "--n", "2", "--k", "2",
               "--out-l", str(out_l), "--out-m", str(out_m)])
    assert rc == 0
    assert np.array_equal(np.loadtxt(out_l, delimiter=",", ndmin=2), [[0.0, 1.0, 0.0, 0.0]])
    assert np.array_equal(np.loadtxt(out_m, delimiter=",", ndmin=2).ravel(), [0.0, 1.0, -1.0, 0.0])


def test_kron_missing_operand_is_usage_error(capsys):
    assert main(["kron", "--op", "product", "--a", "only.csv"]) == 1
    assert "error" in capsys.readouterr().err


def test_block2_modes(tmp_path, capsys):
    blocks = {}
    for name, mat in zip(
        "ABCD",
        [
            [[-1.0, 0.5], [0.5, -1.0]],
            [[0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 0.0]],
            [[-2.0, 0.25], [0.25, -2.0]],
        ],
    ):
        blocks[name] = write_csv(tmp_path / f"{name}.csv", mat)
    args = []
    for name, path in blocks.items():
        args += [f"--{name}", path]
    assert main(["block2", "--mode", "positivity", *args]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "2-positive"
    out = tmp_path / "add2.csv"
    assert main(["block2", "--mode", "add", *args, "--out", str(out)]) == 0
    got = np.loadtxt(out, delimiter=",")
    assert got.shape == (6, 6)
    # negatives anywhere off-diagonal would contradict the positivity verdict
    assert np.all(got - np.diag(np.diag(got)) >= 0)


def test_block2_not_positive_exits_two(tmp_path, capsys):
    rng = np.random.default_rng(0)
    args = []
    for name in "ABCD":
        args += [f"--{name}", write_csv(tmp_path / f"{name}.csv", rng.standard_normal((2, 2)))]
    assert main(["block2", "--mode", "positivity", *args]) == 2
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "not-2-positive"
    assert payload["failed_conditions"]


def test_measure_prints_value(tmp_path, capsys):
    a = write_csv(tmp_path / "a.csv", [[-3.0, 1.0], [2.0, -4.0]])
    assert main(["measure", "--p", "1", "--in", a]) == 0
    # mu_1 = max column sum with diagonal kept: max(-3+2, -4+1) = -1
    assert float(capsys.readouterr().out.strip()) == pytest.approx(-1.0)


def test_metzler_chain_example(tmp_path, capsys):
    chain = write_csv(tmp_path / "m.csv", [[-1.0, 1.0, 0.0], [1.0, -1.0, 1.0], [0.0, 1.0, -1.0]])
    report = tmp_path / "report.json"
    assert main(["metzler", "--in", chain, "--report", str(report)]) == 2
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "not-hurwitz"
    assert payload["gains"] == [1.0, 2.0]
    assert payload["scaling"] is None
    doc = json.loads(report.read_text())
    assert doc["version"] and "generated_at" in doc
    assert doc["config"]["in"] == chain


def test_metzler_hurwitz_emits_scaling(tmp_path, capsys):
    m = write_csv(tmp_path / "m.csv", [[-3.0, 1.0, 0.5], [1.0, -2.0, 0.5], [0.5, 0.5, -1.0]])
    assert main(["metzler", "--in", m]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "hurwitz"
    assert all(g < 1 for g in payload["gains"])
    assert len(payload["scaling"]) == 3 and max(payload["scaling"]) == 1.0


def test_metzler_order_flag(tmp_path, capsys):
    m = write_csv(tmp_path / "m.csv", [[-1.0, 0.1, 0.0], [0.1, -1.0, 2.0], [0.0, 2.0, -1.0]])
    assert main(["metzler", "--in", m, "--order", "1,2,0"]) == 2
    payload = json.loads(capsys.readouterr().out)
    assert payload["gains"][0] == pytest.approx(4.0)


def test_fhn_certify_worked_example(example_coupling, tmp_path, capsys):
    report = tmp_path / "cert.json"
    rc = main(
        ["fhn", "certify", "--a", "0", "--b", "32", "--c", "5",
         "--R", example_coupling, "--p", "2", "--report", str(report)]
    )
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "certified"
    doc = json.loads(report.read_text())
    assert doc["verdict"] == "certified"
    assert doc["details"]["condition4_rhs"] == pytest.approx(448.0 / 114.0, abs=1e-12)
    assert doc["one_contraction_baseline"]["verdict"] == "inconclusive"


def test_fhn_certify_failing_parameters(example_coupling, capsys):
    rc = main(["fhn", "certify", "--b", "0.5", "--c", "5", "--R", example_coupling])
    assert rc == 2
    assert json.loads(capsys.readouterr().out)["verdict"] == "inconclusive"


def test_fhn_simulate_writes_csv_and_svg(example_coupling, tmp_path, capsys):
    out = tmp_path / "traj.csv"
    plot = tmp_path / "traj.svg"
    rc = main(
        ["fhn", "simulate", "--a", "0", "--b", "32", "--c", "5", "--R", example_coupling,
         "--x0", "2,0", "--z0", "0.5,1", "--h", "1e-3", "--T", "1",
         "--out", str(out), "--plot", str(plot)]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,v1,v2,w1,w2"
    assert len(lines) == 1002
    first = [float(v) for v in lines[1].split(",")]
    assert first == [0.0, 2.0, 0.0, 0.5, 1.0]
    svg = plot.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 4
    summary = json.loads(capsys.readouterr().out)
    assert summary["steps"] == 1000


def test_certify_feedback_fhn_config(tmp_path, capsys):
    config = tmp_path / "sys.json"
    config.write_text(
        json.dumps(
            {
                "system": {"kind": "fhn", "a": 0.0, "b": 32.0, "c": 5.0,
                           "R": [[-2.0, 2.0], [2.0, -2.0]]},
                "domain": {"lower": [-3, -3, -3, -3], "upper": [3, 3, 3, 3]},
                "p": 2,
            }
        )
    )
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    rc = main(["certify-feedback", "--config", str(config), "--samples", "500",
               "--seed", "7", "--report", str(r1)])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "certified"
    main(["certify-feedback", "--config", str(config), "--samples", "500",
          "--seed", "7", "--report", str(r2)])
    capsys.readouterr()
    d1, d2 = json.loads(r1.read_text()), json.loads(r2.read_text())
    d1.pop("generated_at"), d2.pop("generated_at")
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)
    assert d1["seed"] == 7
    assert d1["config"]["system"]["kind"] == "fhn"
    assert d1["config"]["samples"] == 500


def test_certify_feedback_polynomial_config(tmp_path, capsys):
    config = tmp_path / "sys.json"
    config.write_text(
        json.dumps(
            {
                "system": {
                    "kind": "polynomial",
                    "n": 2,
                    "m": 2,
                    "f": [
                        [{"coef": -2.0, "powers": [1, 0, 0, 0]}],
                        [{"coef": -2.0, "powers": [0, 1, 0, 0]}],
                    ],
                    "g": [
                        [{"coef": -3.0, "powers": [0, 0, 1, 0]}],
                        [{"coef": -3.0, "powers": [0, 0, 0, 1]}],
                    ],
                },
                "domain": {"lower": [-1, -1, -1, -1], "upper": [1, 1, 1, 1]},
            }
        )
    )
    rc = main(["certify-feedback", "--config", str(config), "--samples", "100", "--seed", "1"])
    out = json.loads(capsys.readouterr().out)
    # decoupled contracting system: every sample is negative but there is no
    # constant route in the config, so sampling alone stays inconclusive
    assert rc == 2
    assert out["verdict"] == "inconclusive"
    assert out["eta"] > 0


def test_certify_feedback_bad_config(tmp_path, capsys):
    config = tmp_path / "sys.json"
    config.write_text('{"system": {"kind": "unknown"}}')
    assert main(["certify-feedback", "--config", str(config)]) == 1
    assert "unknown" in capsys.readouterr().err


def test_usage_errors_exit_one(capsys):
    assert main(["compound", "--k", "2"]) == 1  # missing --mode/--in
    capsys.readouterr()
    assert main(["no-such-command"]) == 1
    capsys.readouterr()
    assert main(["compound", "--k", "2", "--mode", "bogus", "--in", "x.csv"]) == 1
    capsys.readouterr()


def test_runtime_errors_exit_one(tmp_path, capsys):
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3\n")
    assert main(["measure", "--p", "2", "--in", str(ragged)]) == 1
    err = capsys.readouterr().err
    assert "ragged" in err and ":2" in err
    assert main(["measure", "--p", "2", "--in", str(tmp_path / "missing.csv")]) == 1
    capsys.readouterr()


def test_selftest_command_passes(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "checks passed" in out
    assert "FAIL" not in out
