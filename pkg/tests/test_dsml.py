#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_dsml
----------------------------------

Tests for the `dsml` command line interface.
"""

import tempfile
import textwrap
import unittest
from pathlib import Path

from click.testing import CliRunner

from dsml.__main__ import main
from dsml.datagen import load_dataset
from dsml.experiment import ExperimentConfig
from dsml.options import load_configs

CONFIG = """
"experiment":
    "name": "cli"
    "seed": 11
    "replications": 2
    "sweep":
        "param": "n"
        "values": [30, 40]
    "fixed":
        "m": 2
    "methods": %(methods)s
    "output": "%(output)s"
    "method_paths": ["%(method_paths)s"]
"gen":
    "p": 15
    "s": 2
"tuning":
    "path_size": 4
"""

LOG = """
"log_config":
    "version": 1
    "disable_existing_loggers": false
    "filters":
        "runctx":
            "()": "dsml.log.get_context_filter"
    "formatters":
        "verbose":
            "format": "%(asctime)s %(runctx)s %(levelname)-8s %(message)s"
    "handlers":
        "file":
            "class": "logging.FileHandler"
            "filename": "logs/log.log"
            "mode": "w"
            "formatter": "verbose"
            "filters": ["runctx"]
    "root":
        "level": "DEBUG"
        "handlers": ["file"]
"""


class TestDsml(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.runner = CliRunner()

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, methods='["lasso", "dsml"]', name="conf"):
        conf = self.dir / name
        conf.mkdir()
        output = self.dir / (name + ".csv")
        (conf / "experiment.yml").write_text(
            CONFIG % {"methods": methods, "output": output, "method_paths": self.dir}
        )
        (conf / "log.yml").write_text(LOG)
        return conf, output

    def invoke(self, *args, **kwargs):
        return self.runner.invoke(main, ["-w", str(self.dir / "work")] + list(args), **kwargs)

    def test_command_line_interface(self):
        help_result = self.runner.invoke(main, ["--help"])
        assert help_result.exit_code == 0
        assert "Show this message and exit." in help_result.output
        for command in ("run", "summarize", "generate"):
            assert command in help_result.output

    def test_run(self):
        conf, output = self.write_config()
        result = self.invoke("run", "--config", str(conf))
        self.assertEqual(result.exit_code, 0, result.output)
        lines = output.read_text().splitlines()
        self.assertEqual(len(lines), 1 + 2 * 2 * 2)
        self.assertTrue((self.dir / "conf.meta.yml").exists())
        self.assertTrue((self.dir / "work" / "logs" / "log.log").exists())

    def test_run_is_reproducible(self):
        conf, output = self.write_config()
        first = self.dir / "first.csv"
        second = self.dir / "second.csv"
        self.assertEqual(self.invoke("run", "-c", str(conf), "-o", str(first)).exit_code, 0)
        self.assertEqual(self.invoke("run", "-c", str(conf), "-o", str(second), "--jobs", "2").exit_code, 0)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        third = self.dir / "third.csv"
        self.assertEqual(self.invoke("run", "-c", str(conf), "-o", str(third), "--seed", "12").exit_code, 0)
        self.assertNotEqual(first.read_bytes(), third.read_bytes())

    def test_jobs_from_environment(self):
        conf, output = self.write_config()
        result = self.invoke("run", "-c", str(conf), env={"DSML_JOBS": "2"})
        self.assertEqual(result.exit_code, 0, result.output)
        bad = self.invoke("run", "-c", str(conf), env={"DSML_JOBS": "0"})
        self.assertNotEqual(bad.exit_code, 0)

    def test_config_error(self):
        conf, _ = self.write_config(methods='["no_such_method"]')
        result = self.invoke("run", "--config", str(conf))
        self.assertEqual(result.exit_code, 1)
        self.assertIn("no_such_method", result.output)
        missing = self.invoke("run", "--config", str(self.dir / "missing"))
        self.assertEqual(missing.exit_code, 1)

    def test_excessive_failures(self):
        (self.dir / "always_fails.py").write_text(
            textwrap.dedent(
                """
                method_name = "always_fails"


                def fit(problem, tuning):
                    raise ValueError("nope")
                """
            )
        )
        conf, output = self.write_config(methods='["always_fails", "lasso"]')
        result = self.invoke("run", "--config", str(conf))
        self.assertEqual(result.exit_code, 2)
        self.assertIn("ValueError: nope", output.read_text())

    def test_summarize(self):
        conf, output = self.write_config()
        self.assertEqual(self.invoke("run", "-c", str(conf)).exit_code, 0)
        summary = self.dir / "summary.csv"
        result = self.invoke("summarize", "--input", str(output), "--output", str(summary))
        self.assertEqual(result.exit_code, 0, result.output)
        lines = summary.read_text().splitlines()
        self.assertTrue(lines[0].startswith("method,sweep_value,rows,failures,hamming_mean,hamming_sd"))
        self.assertEqual(len(lines), 1 + 2 * 2)

    def test_summarize_malformed(self):
        bad = self.dir / "bad.csv"
        bad.write_text("method,sweep_value\nlasso,50\n")
        result = self.invoke("summarize", "-i", str(bad), "-o", str(self.dir / "s.csv"))
        self.assertEqual(result.exit_code, 1)
        self.assertIn("line 1", result.output)

    def test_generate(self):
        spec = self.dir / "spec.yml"
        spec.write_text('"gen":\n    "p": 8\n    "n": 5\n    "m": 2\n    "s": 2\n    "seeds": [1, 2]\n')
        out = self.dir / "data"
        result = self.invoke("generate", "--spec", str(spec), "--output", str(out))
        self.assertEqual(result.exit_code, 0, result.output)
        files = sorted(out.iterdir())
        self.assertEqual(len(files), 2)
        header, data = load_dataset(files[0])
        self.assertEqual((header["p"], header["n"], header["m"]), (8, 5, 2))
        self.assertEqual(len(data.tasks), 2)

    def test_generate_bad_spec(self):
        spec = self.dir / "spec.yml"
        spec.write_text('"p": 4\n"s": 9\n')
        result = self.invoke("generate", "--spec", str(spec), "--output", str(self.dir / "data"))
        self.assertEqual(result.exit_code, 1)

    def test_shipped_config(self):
        options = load_configs(Path(__file__).resolve().parent.parent / "config")
        config = ExperimentConfig.from_options(options)
        self.assertEqual(config.sweep_param, "n")
        self.assertIn("dsml", config.methods)
        self.assertEqual(config.replications, 200)
