"""
Unit tests for the ternary-mass command-line interface.
"""

import json
import logging
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from typer.testing import CliRunner

from src.ternary.cli import app
from src.ternary.verify import CheckResult, Status


@patch("src.ternary.cli.setup_logging")
class TestCommands(unittest.TestCase):
    """Test the machine-readable output of each command."""

    def setUp(self):
        """Keep INFO records away from stdout."""
        self.runner = CliRunner()
        self.logger = logging.getLogger("src.ternary")
        self.level = self.logger.level
        self.logger.setLevel(logging.WARNING)

    def tearDown(self):
        """Restore the package logger level."""
        self.logger.setLevel(self.level)

    def run_json(self, *args):
        result = self.runner.invoke(app, [*args, "--format", "json"])
        self.assertEqual(result.exit_code, 0, result.output)
        return json.loads(result.stdout)

    def test_mass(self, mock_logging):
        """mass --D t prints the 1/8 formula in schema v1."""
        payload = self.run_json("mass", "--D", "t")
        self.assertEqual(payload["schema"], "v1")
        self.assertEqual(payload["command"], "mass")
        self.assertEqual(payload["formula"], "1/8")
        self.assertEqual(payload["rows"], [])
        mock_logging.assert_called_once_with(False)

    def test_mass_enumerated(self, mock_logging):
        """--enumerate adds h and the enumerated mass."""
        payload = self.run_json("mass", "--D", "t^2+t", "--enumerate")
        self.assertEqual(payload["enumerated"], "1/4")
        self.assertEqual(payload["verdict"], "PASS")

    def test_classno_with_oracle(self, mock_logging):
        """h(2t) = 1, confirmed by the ideal-class oracle."""
        payload = self.run_json("classno", "--m", "2*t", "--oracle")
        self.assertEqual(payload["h"], 1)
        self.assertEqual(payload["h_oracle"], 1)
        self.assertEqual(payload["verdict"], "PASS")

    def test_lpoly(self, mock_logging):
        """One row per coefficient of L*(u, chi_b)."""
        payload = self.run_json("lpoly", "--b", "t^3+2*t+2")
        self.assertEqual(payload["b"], "t^3+2*t+2")
        self.assertEqual(payload["rh_bound"], "PASS")
        self.assertEqual(payload["rows"][0], {"k": 0, "c_k": "1"})

    def test_genus(self, mock_logging):
        """The cubic genus has four classes and the mass check passes."""
        payload = self.run_json("genus", "--D", "t^3+2*t+2")
        self.assertEqual(payload["h"], 4)
        self.assertEqual(payload["mass"], "13/8")
        self.assertEqual(len(payload["rows"]), 4)

    def test_represent(self, mock_logging):
        """Siegel's sum for a = t+1 in the genus of t."""
        payload = self.run_json("represent", "--D", "t", "--a", "t+1")
        self.assertEqual(payload["weighted_sum"], "1")
        self.assertEqual(payload["class_number_side"], "1")
        self.assertEqual(payload["rows"][0]["R"], 8)

    def test_average_drops_floats(self, mock_logging):
        """Approximate columns stay out of the JSON rows."""
        payload = self.run_json("average", "--D", "t", "--lmin", "2", "--lmax", "2")
        self.assertEqual(payload["limit"], "16/13")
        self.assertEqual(payload["rows"][0]["count"], 12)
        self.assertNotIn("deviation (approx)", payload["rows"][0])

    def test_epstein(self, mock_logging):
        """alpha_k of the seed lattice of t."""
        payload = self.run_json("epstein", "--D", "t", "--kmax", "2")
        self.assertEqual([row["count"] for row in payload["rows"]], [8, 18, 216])

    def test_tsv(self, mock_logging):
        """tsv output starts with the schema comment, then a header row."""
        result = self.runner.invoke(app, ["epstein", "--D", "t", "--kmax", "2", "--format", "tsv"])
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.stdout.splitlines()
        self.assertEqual(lines[0], "# schema=v1 command=epstein")
        self.assertIn("k\tcount\tclosed_form", lines)

    def test_config_file(self, mock_logging):
        """Options missing on the command line come from --config."""
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / "run.json"
            config.write_text(json.dumps({"D": "t", "q": 5, "format": "json"}))
            result = self.runner.invoke(app, ["mass", "--config", str(config)])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(json.loads(result.stdout)["formula"], "1/12")


@patch("src.ternary.cli.setup_logging")
class TestExitCodes(unittest.TestCase):
    """Test error reporting and exit codes."""

    def setUp(self):
        """Create the runner."""
        self.runner = CliRunner()

    def test_bad_polynomial(self, mock_logging):
        """Unparseable input exits with 3."""
        result = self.runner.invoke(app, ["mass", "--D", "x+1"])
        self.assertEqual(result.exit_code, 3)
        self.assertIn("error[bad-polynomial]", result.output)

    def test_preconditions(self, mock_logging):
        """q = 9, a non-squarefree D and a missing D exit with 4."""
        for args in (["mass", "--D", "t", "--q", "9"], ["mass", "--D", "t^2"], ["mass"]):
            with self.subTest(args=args):
                result = self.runner.invoke(app, args)
                self.assertEqual(result.exit_code, 4)
                self.assertIn("error[precondition]", result.output)

    def test_bad_format(self, mock_logging):
        """Unknown output formats are rejected."""
        result = self.runner.invoke(app, ["classno", "--m", "t", "--format", "xml"])
        self.assertEqual(result.exit_code, 4)

    def test_unknown_suite(self, mock_logging):
        """verify --suite accepts fast or all."""
        result = self.runner.invoke(app, ["verify", "--suite", "quick"])
        self.assertEqual(result.exit_code, 4)

    @patch("src.ternary.cli.run_suite")
    def test_verify_failure(self, mock_run_suite, mock_logging):
        """A failing check exits with 7."""
        mock_run_suite.return_value = [
            CheckResult("mass-irreducible", Status.PASS, "ok", 0.1),
            CheckResult("siegel", Status.FAIL, "lhs != rhs", 0.2),
        ]
        result = self.runner.invoke(app, ["verify", "--format", "json"])
        self.assertEqual(result.exit_code, 7)
        payload = json.loads(result.stdout)
        self.assertEqual(payload["passed"], "1/2")
        self.assertNotIn("seconds", payload["rows"][0])

    @patch("src.ternary.cli.run_suite")
    def test_verify_success(self, mock_run_suite, mock_logging):
        """All checks passing exits with 0."""
        mock_run_suite.return_value = [CheckResult("clifford", Status.PASS, "15 lattices", 0.1)]
        result = self.runner.invoke(app, ["verify", "--suite", "all", "--format", "json"])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(json.loads(result.stdout)["verdict"], "PASS")
        mock_run_suite.assert_called_once()


if __name__ == '__main__':
    unittest.main()
