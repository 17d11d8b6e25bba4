import json
import subprocess
import sys

import numpy as np
import pytest

from emsimon.cli import main
from emsimon.galois import parse_lut
from emsimon.synth import load_circuit, truth_table


def run(tmp_path, *argv, sub="out"):
    out = tmp_path / sub
    code = main([argv[0], "--out", str(out), *argv[1:]])
    return code, out


def error_of(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


class TestSbox:
    def test_published_lut(self, tmp_path, capsys):
        code, out = run(tmp_path, "sbox", "--lut", "52367401", "--n", "3", "--verify")
        assert code == 0
        assert capsys.readouterr().out.startswith("OK n=3 lut=52367401")
        m = manifest(out)
        assert m["command"] == "sbox" and "sbox.json" in m["outputs"]

    def test_identity(self, tmp_path):
        assert run(tmp_path, "sbox", "--lut", "01234567", "--n", "3", "--verify")[0] == 0

    def test_not_bijective(self, tmp_path, capsys):
        code, _ = run(tmp_path, "sbox", "--lut", "00234567", "--n", "3", "--verify")
        assert code == 1 and error_of(capsys)["error"] == "NotBijective"

    def test_build_from_parameters(self, tmp_path, capsys):
        code, out = run(tmp_path, "sbox", "--poly", "1101", "--matrix", "011,101,111", "--constant", "101")
        assert code == 0
        assert (out / "lut.txt").read_text().strip() == "52367401"

    def test_search(self, tmp_path):
        code, out = run(tmp_path, "sbox", "--lut", "52367401", "--n", "3", "--search")
        assert code == 0
        body = json.loads((out / "sbox.json").read_text())
        assert body["parameters"]


class TestSynthVerify:
    def test_synth_roundtrip(self, tmp_path, capsys):
        code, out = run(tmp_path, "synth", "--lut", "E4B238091A7F6C5D", "--n", "4")
        assert code == 0
        c = load_circuit(out / "circuit.circ")
        assert truth_table(c) == parse_lut("E4B238091A7F6C5D", 4)

    def test_identity_is_empty(self, tmp_path):
        code, out = run(tmp_path, "synth", "--lut", "01234567", "--n", "3")
        body = json.loads((out / "metrics.json").read_text())
        assert code == 0 and body["gates"] == 0 and body["depth"] == 0

    def test_random_n6_verifies(self, tmp_path):
        lut = "".join(f"{v:02X}" for v in np.random.default_rng(6).permutation(64))
        code, out = run(tmp_path, "synth", "--lut", lut, "--n", "6", sub="s")
        assert code == 0
        code, _ = run(tmp_path, "verify", "--circuit", str(out / "circuit.circ"), "--lut", lut, sub="v")
        assert code == 0

    def test_verify_fig4(self, tmp_path, capsys):
        code, out = run(tmp_path, "verify", "--circuit", "fig4")
        assert code == 0
        body = json.loads((out / "verify.json").read_text())
        assert body["matches"] and body["statevector_agrees"] and body["depth"] == 23 and body["t_depth"] == 3
        assert body["truth_table"] == "52367401"

    def test_verify_reports_mismatch(self, tmp_path, capsys):
        code, out = run(tmp_path, "verify", "--circuit", "fig4", "--lut", "01234567")
        assert code == 1
        assert capsys.readouterr().out.startswith("MISMATCH")

    def test_costs_file(self, tmp_path):
        costs = tmp_path / "costs.json"
        costs.write_text(json.dumps({"toffoli": 1}))
        code, out = run(tmp_path, "verify", "--circuit", "fig4", "--costs", str(costs))
        assert code == 0 and json.loads((out / "verify.json").read_text())["depth"] == 5
        assert str(costs) in manifest(out)["inputs"]


class TestSimulate:
    def test_exact_and_counts(self, tmp_path, capsys):
        code, out = run(tmp_path, "simulate", "--lut", "52367401", "--n", "3", "--k1", "010",
                        "--k2", "110", "--shots", "1000", "--seed", "5")
        assert code == 0
        exact = (out / "exact.csv").read_text().splitlines()
        assert exact[0] == "outcome,probability" and exact[1] == "000,0.25"
        assert float(exact[3].split(",")[1]) == 0
        counts = json.loads((out / "counts.json").read_text())
        assert counts["shots"] == 1000 and counts["seed"] == 5
        assert sum(counts["entries"].values()) == 1000


class TestAttack:
    def test_three_bit(self, tmp_path, capsys):
        code, out = run(tmp_path, "attack", "--lut", "52367401", "--n", "3", "--k1", "010",
                        "--k2", "110", "--r", "16")
        assert code == 0
        body = json.loads((out / "result.json").read_text())
        assert body["success"] and body["recovered_k1"] == "010" and body["recovered_k2"] == "110"

    def test_four_bit_noisy(self, tmp_path):
        code, out = run(tmp_path, "attack", "--lut", "E4B238091A7F6C5D", "--n", "4", "--k1", "0101",
                        "--k2", "1101", "--noise-p", "0.434", "--shots", "100000",
                        "--strategy", "top-half", "--seed", "3")
        body = json.loads((out / "result.json").read_text())
        assert code == 0 and body["success"]
        assert (body["recovered_k1"], body["recovered_k2"]) == ("0101", "1101")

    def test_one_shot_exit_2(self, tmp_path, capsys):
        code, _ = run(tmp_path, "attack", "--lut", "52367401", "--n", "3", "--k1", "010",
                      "--k2", "110", "--shots", "1")
        assert code == 2 and error_of(capsys)["error"] == "ShotBudgetExhausted"

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "inst.json"
        cfg.write_text(json.dumps({"n": 3, "lut": "52367401", "k1": "010", "k2": "110"}))
        code, out = run(tmp_path, "attack", "--config", str(cfg), "--r", "16")
        assert code == 0 and json.loads((out / "result.json").read_text())["success"]

    def test_trials_parallel_matches_serial(self, tmp_path):
        common = ["--lut", "52367401", "--n", "3", "--k1", "010", "--k2", "110",
                  "--shots", "20000", "--strategy", "top-half", "--noise-p", "0.434",
                  "--trials", "6", "--seed", "9"]
        c1, a = run(tmp_path, "attack", *common, "--jobs", "1", sub="a")
        c2, b = run(tmp_path, "attack", *common, "--jobs", "3", sub="b")
        assert c1 == c2 == 0
        sa = json.loads((a / "summary.json").read_text())
        sb = json.loads((b / "summary.json").read_text())
        assert sa["successes"] == sb["successes"] == 6
        for i in range(6):
            ra = json.loads((a / f"result_{i:04d}.json").read_text())
            rb = json.loads((b / f"result_{i:04d}.json").read_text())
            ra.pop("distribution_path"), rb.pop("distribution_path")
            assert ra == rb

    def test_rerun_is_byte_identical(self, tmp_path):
        argv = ["attack", "--lut", "E4B238091A7F6C5D", "--n", "4", "--k1", "0101", "--k2", "1101",
                "--noise-p", "0.3", "--shots", "3000", "--strategy", "top-half", "--seed", "21",
                "--k2-mode", "noisy"]
        out = tmp_path / "same"
        assert main([argv[0], "--out", str(out), *argv[1:]]) == 0
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        assert main([argv[0], "--out", str(out), *argv[1:]]) == 0
        second = {p.name: p.read_bytes() for p in out.iterdir()}
        assert first == second


class TestScalars:
    def test_epsilon(self, tmp_path, capsys):
        code, out = run(tmp_path, "epsilon", "--lut", "E4B238091A7F6C5D", "--n", "4", "--k1", "0101")
        assert code == 0
        body = json.loads((out / "epsilon.json").read_text())
        assert body["epsilon"] == "1/2" and body["collision_counts"][0b0001] == 8

    def test_psucc(self, tmp_path, capsys):
        code, _ = run(tmp_path, "psucc", "--eps", "0", "--c", "3", "--n", "3")
        assert code == 0 and capsys.readouterr().out.strip() == "0.984375"

    def test_psucc_bad_eps(self, tmp_path, capsys):
        code, _ = run(tmp_path, "psucc", "--eps", "1", "--c", "3", "--n", "3")
        assert code == 1 and error_of(capsys)["error"] == "EpsilonOutOfRange"

    def test_noise_fit(self, tmp_path, capsys):
        code, out = run(tmp_path, "noise-fit", "--p", "0.434", "--table", "fixtures/table1_simon.csv")
        assert code == 0
        body = json.loads((out / "noise_fit.json").read_text())
        assert body["tv_distance"] == pytest.approx(0.034068, abs=1e-6)

    def test_noise_fit_from_pulses(self, tmp_path):
        code, out = run(tmp_path, "noise-fit", "--m-pulses", "434", "--table", "table1_simon")
        body = json.loads((out / "noise_fit.json").read_text())
        assert code == 0 and body["p"] == pytest.approx(0.434)


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ["sbox"],
        ["sbox", "--lut", "5236", "--n", "3"],
        ["attack", "--lut", "52367401", "--n", "3"],
        ["attack", "--lut", "52367401", "--n", "3", "--k1", "01"],
        ["verify", "--circuit", "nope.circ"],
        ["noise-fit", "--table", "table1_simon"],
        ["frobnicate"],
    ])
    def test_single_line_json_error(self, tmp_path, capsys, argv):
        code = main([*argv, "--out", str(tmp_path / "e")]) if argv[0] != "frobnicate" else main(argv)
        assert code == 1
        err = error_of(capsys)
        assert set(err) == {"error", "message"}


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "emsimon.cli", "psucc", "--eps", "0", "--c", "3",
                          "--n", "3", "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "0.984375"
