#!/usr/bin/env python3
"""End-to-end checks of the residue-lab binary.

    python3 tests/cli/test_cli.py <path/to/residue-lab> <source dir>
"""

import csv
import io
import json
import math
import os
import subprocess
import sys
import tempfile
import unittest
from fractions import Fraction
from pathlib import Path

import jsonschema

BINARY = None
SOURCE = None


def run(*args, env=None, check_exit=None):
    full_env = dict(os.environ)
    full_env.pop("RESIDUE_LAB_THREADS", None)
    if env:
        full_env.update(env)
    proc = subprocess.run([BINARY, *args], capture_output=True, text=True, env=full_env, timeout=600)
    if check_exit is not None and proc.returncode != check_exit:
        raise AssertionError(f"{args}: exit {proc.returncode}, stderr:\n{proc.stderr}")
    return proc


def run_json(*args, **kw):
    return json.loads(run(*args, "--no-timing", check_exit=0, **kw).stdout)


def csv_body(text):
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


class Examples(unittest.TestCase):
    def test_moment_example(self):
        row = run_json("moments", "--q", "15", "--offsets", "0,2", "--h", "4", "--k", "2")["rows"][0]
        self.assertEqual(row["moment"], "32/5")
        self.assertEqual(row["moment_float"], 6.4)
        self.assertAlmostEqual(row["expsum"], 6.4, delta=1e-9)
        self.assertAlmostEqual(row["lemma21_ratio"], 0.1875, delta=1e-12)

    def test_squares_example(self):
        row = run_json("squares", "--q", "15", "--h", "4")["rows"][0]
        self.assertEqual(Fraction(row["lhs_exact"]), Fraction(28, 5))
        self.assertEqual(Fraction(row["lhs_paper"]), Fraction(431, 64))
        self.assertEqual(Fraction(row["rhs"]), Fraction(225, 8))
        self.assertIs(row["within_rhs"], True)

    def test_gaps_example(self):
        rows = run_json("gaps", "--q", "15,30", "--offsets", "0", "--lambda", "2")["rows"]
        self.assertEqual([r["V_lambda"] for r in rows], ["33/1", "132/1"])

    def test_corollary1_modulus(self):
        rows = run_json("corollary1", "--x", "20")["rows"]
        self.assertTrue(rows)
        self.assertTrue(all(r["q"] == 899 and r["primes"] == "29,31" for r in rows))


class Schema(unittest.TestCase):
    CASES = [
        ("verify-identities", "--q", "15,30"),
        ("moments", "--q", "30", "--offsets", "0;0,2", "--h-grid", "log2", "--k", "2,4"),
        ("gaps", "--q-family", "primorial:4", "--offsets", "0;0,2", "--lambda", "1,2,2.5"),
        ("squares", "--q", "15,105", "--h-grid", "1..20", "--centering", "paper"),
        ("omega-sets", "--q-range", "1..60", "--corpus", "qr"),
        ("corollary1", "--x", "20"),
        ("bounds-sweep", "--q", "30", "--offsets", "0,2", "--h", "2,8", "--k", "2,3", "--bounds", "all"),
        ("pin", "--sweeps", "erdos_ratio/D=0,2/"),
    ]

    @classmethod
    def setUpClass(cls):
        cls.schema = json.loads((Path(SOURCE) / "schema" / "result.schema.json").read_text())

    def test_every_experiment_validates(self):
        for case in self.CASES:
            with self.subTest(experiment=case[0]):
                if case[0] == "pin":
                    doc = run_json(*case)
                    self.assertEqual(set(doc), {"margin", "pins"})
                    self.assertTrue(doc["pins"])
                    continue
                doc = run_json(*case)
                jsonschema.validate(doc, self.schema)
                self.assertEqual(doc["experiment"], case[0])
                self.assertTrue(doc["rows"])

    def test_failed_precondition_gives_null_cells(self):
        doc = run_json("bounds-sweep", "--q", "30", "--offsets", "0,2", "--h", "2", "--k", "3", "--bounds", "lemma21")
        jsonschema.validate(doc, self.schema)
        row = doc["rows"][0]
        self.assertIn("k even", row["precondition"])
        self.assertIsNone(row["ratio"])
        self.assertIsNone(row["bound_value"])


class Csv(unittest.TestCase):
    def test_columns_match_json_order(self):
        args = ("moments", "--q", "30", "--offsets", "0,2", "--h", "3", "--k", "2")
        doc = run_json(*args)
        text = run(*args, "--format", "csv", "--no-timing", check_exit=0).stdout
        reader = csv.reader(io.StringIO(csv_body(text)))
        header = next(reader)
        self.assertEqual(header, list(doc["rows"][0].keys()))
        rows = list(reader)
        self.assertEqual(len(rows), len(doc["rows"]))
        self.assertEqual(rows[0][header.index("moment")], doc["rows"][0]["moment"])

    def test_metadata_lines(self):
        text = run("gaps", "--q", "30", "--format", "csv", "--no-timing", check_exit=0).stdout
        meta = [line for line in text.splitlines() if line.startswith("#")]
        self.assertEqual(meta[0], "# experiment: gaps")
        config = json.loads(meta[1][len("# config: "):])
        self.assertEqual(config["q"], [30])
        self.assertIn("runtime_ms: 0", meta[2])

    def test_out_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "gaps.csv"
            run("gaps", "--q", "30", "--format", "csv", "--out", str(path), "--no-timing", check_exit=0)
            self.assertTrue(csv_body(path.read_text()).startswith("q,omega,offsets,lambda"))


class Determinism(unittest.TestCase):
    ARGS = ("moments", "--q-range", "1..120", "--offsets", "0;0,2", "--h-grid", "log2", "--k", "2,3,4")

    def test_byte_identical_reruns(self):
        a = run(*self.ARGS, "--no-timing", check_exit=0).stdout
        b = run(*self.ARGS, "--no-timing", check_exit=0).stdout
        self.assertEqual(a, b)

    def test_thread_count_does_not_change_rows(self):
        one = run_json(*self.ARGS, "--threads", "1")["rows"]
        four = run_json(*self.ARGS, "--threads", "4")["rows"]
        env = run_json(*self.ARGS, env={"RESIDUE_LAB_THREADS": "3"})
        self.assertEqual(one, four)
        self.assertEqual(one, env["rows"])
        self.assertEqual(env["config"]["threads"], 3)

    def test_random_corpus_is_reproducible(self):
        args = ("omega-sets", "--q-range", "1..300", "--corpus", "random")
        self.assertEqual(run_json(*args)["rows"], run_json(*args)["rows"])


class ExitCodes(unittest.TestCase):
    def test_help_and_version(self):
        self.assertIn("verify-identities", run("--help", check_exit=0).stdout)
        self.assertRegex(run("--version", check_exit=0).stdout.strip(), r"^\d+\.\d+\.\d+$")

    def test_committed_pins_pass(self):
        pins = str(Path(SOURCE) / "pins" / "oracle_pins.json")
        run("gaps", "--q-family", "primorial:6", "--offsets", "0;0,2", "--lambda", "2,3", "--pins", pins, check_exit=0)
        run("corollary1", "--x", "20", "--pins", pins, check_exit=0)

    def test_tight_pin_fails_with_exit_1(self):
        manifest = json.loads((Path(SOURCE) / "pins" / "oracle_pins.json").read_text())
        for p in manifest["pins"]:
            if p["id"] == "erdos_ratio/D=0/lambda=2":
                p["value"] *= 0.5
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "tight.json"
            path.write_text(json.dumps(manifest))
            proc = run("gaps", "--q-family", "primorial:6", "--offsets", "0", "--lambda", "2", "--pins", str(path))
        self.assertEqual(proc.returncode, 1, proc.stderr)
        self.assertIn("FAIL: pin erdos_ratio/D=0/lambda=2", proc.stderr)
        self.assertTrue(json.loads(proc.stdout)["rows"])

    def test_config_errors_exit_2(self):
        cases = [
            ("moments", "--k", "abc"),
            ("moments", "--q", "12"),
            ("gaps", "--q", "30", "--offsets", "0,1"),
            ("squares", "--centering", "sideways"),
            ("moments", "--nope"),
            ("moments", "--q", "15", "--q-range", "1..9"),
        ]
        for case in cases:
            with self.subTest(args=case):
                proc = run(*case)
                self.assertEqual(proc.returncode, 2, proc.stderr)
                self.assertTrue(proc.stderr.strip())

    def test_config_file_and_precedence(self):
        with tempfile.TemporaryDirectory() as tmp:
            good = Path(tmp) / "good.json"
            good.write_text(json.dumps({"q": "15", "offsets": "0,2", "h": "4", "k": "2"}))
            row = run_json("moments", "--config", str(good))["rows"][0]
            self.assertEqual(row["moment"], "32/5")
            row = run_json("moments", "--config", str(good), "--h", "5")["rows"][0]
            self.assertEqual(row["h"], 5)
            bad = Path(tmp) / "bad.json"
            bad.write_text(json.dumps({"bogus": 1}))
            proc = run("gaps", "--config", str(bad))
            self.assertEqual(proc.returncode, 2)
            self.assertIn("bogus", proc.stderr)

    def test_budget_exceeded_exit_2(self):
        proc = run("gaps", "--q", "30030", "--mem-budget", "1000")
        self.assertEqual(proc.returncode, 2, proc.stderr)


class Pins(unittest.TestCase):
    def test_sweeps_none_gives_empty_manifest(self):
        doc = run_json("pin", "--sweeps", "none")
        self.assertEqual(doc, {"margin": 0.05, "pins": []})

    def test_cheap_sweeps_match_committed_manifest(self):
        committed = {p["id"]: p for p in json.loads((Path(SOURCE) / "pins" / "oracle_pins.json").read_text())["pins"]}
        doc = run_json("pin", "--sweeps", "erdos_ratio,moments_,corollary1")
        self.assertEqual(len(doc["pins"]), 10)
        for p in doc["pins"]:
            ref = committed[p["id"]]
            self.assertEqual(p["kind"], ref["kind"])
            self.assertEqual(p["where"], ref["where"])
            self.assertTrue(math.isclose(p["value"], ref["value"], rel_tol=1e-9), p["id"])


if __name__ == "__main__":
    BINARY, SOURCE = sys.argv[1], sys.argv[2]
    unittest.main(argv=[sys.argv[0], "-v"])
