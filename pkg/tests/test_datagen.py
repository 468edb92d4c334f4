#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_datagen
----------------------------------

Tests for `dsml.datagen` module.
"""

import tempfile
import unittest
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose
from scipy import linalg

from dsml.core import Family
from dsml.datagen import GenSpec, ar_covariance, generate, load_dataset, rng_for, save_dataset
from dsml.errors import DataFormatError, ProblemError


class TestCovariance(unittest.TestCase):
    def test_half(self):
        Sigma = ar_covariance(4, 0.5)
        self.assertEqual(Sigma[0, 1], 0.5)
        self.assertEqual(Sigma[0, 2], 0.25)
        assert_allclose(np.diag(Sigma), 1.0)

    def test_zero_rho(self):
        assert_allclose(ar_covariance(3, 0.0), np.eye(3))

    def test_cholesky(self):
        Sigma = ar_covariance(4, 0.5)
        L = linalg.cholesky(Sigma, lower=True)
        assert_allclose(L @ L.T, Sigma, atol=1e-12)

    def test_invalid_rho(self):
        with self.assertRaises(ProblemError):
            ar_covariance(3, 1.0)


class TestGenerate(unittest.TestCase):
    def test_shared_support(self):
        spec = GenSpec(p=40, n=20, m=5, s=6, seed=1)
        tasks, B_star, support = generate(spec)
        self.assertEqual(len(tasks), 5)
        self.assertEqual(len(support), 6)
        for t in range(5):
            self.assertEqual(tuple(np.flatnonzero(B_star.column(t))), support.indices)
        self.assertEqual((tasks[0].n, tasks[0].p), (20, 40))

    def test_coefficient_range(self):
        _, B_star, support = generate(GenSpec(p=30, m=4, s=5, coef_low=0.5, coef_high=2.0, seed=3))
        values = B_star.entries[support.as_array()]
        self.assertTrue(np.all((values >= 0.5) & (values <= 2.0)))

    def test_logistic_labels(self):
        tasks, _, _ = generate(GenSpec(p=10, n=50, m=3, s=2, family=Family.LOGISTIC, seed=2))
        for task in tasks:
            self.assertEqual(task.family, Family.LOGISTIC)
            self.assertTrue(set(np.unique(task.y)) <= {-1.0, 1.0})

    def test_empirical_covariance(self):
        for design in ("gaussian", "rademacher"):
            tasks, _, _ = generate(GenSpec(p=5, n=20000, m=5, s=1, rho=0.5, design=design, seed=4))
            X = np.vstack([task.X for task in tasks])
            assert_allclose(X.T @ X / X.shape[0], ar_covariance(5, 0.5), atol=0.02)

    def test_deterministic(self):
        spec = GenSpec(p=20, n=10, m=3, s=2, seed=11)
        a, b = generate(spec), generate(spec)
        for ta, tb in zip(a.tasks, b.tasks):
            self.assertEqual(ta.X.tobytes(), tb.X.tobytes())
            self.assertEqual(ta.y.tobytes(), tb.y.tobytes())
        self.assertEqual(a.support, b.support)
        other = generate(spec.replace(seed=12))
        self.assertFalse(np.array_equal(a.tasks[0].X, other.tasks[0].X))

    def test_noise_vanishes_with_sigma(self):
        base = generate(GenSpec(p=15, n=25, m=2, s=3, sigma=1.0, seed=6))
        for sigma in (1e-3, 1e-6, 1e-9):
            data = generate(GenSpec(p=15, n=25, m=2, s=3, sigma=sigma, seed=6))
            for t, task in enumerate(data.tasks):
                residual = task.y - task.X @ data.B_star.column(t)
                base_residual = base.tasks[t].y - base.tasks[t].X @ base.B_star.column(t)
                assert_allclose(residual, sigma * base_residual, rtol=1e-6, atol=1e-12)
                self.assertLessEqual(np.max(np.abs(residual)), 10.0 * sigma)

    def test_growing_m_keeps_first_tasks(self):
        small = generate(GenSpec(p=20, n=10, m=2, s=2, seed=5))
        large = generate(GenSpec(p=20, n=10, m=4, s=2, seed=5))
        self.assertEqual(small.support, large.support)
        self.assertEqual(small.tasks[1].X.tobytes(), large.tasks[1].X.tobytes())

    def test_streams_are_independent(self):
        a = rng_for(1, 0, 0).standard_normal(3)
        b = rng_for(1, 0, 1).standard_normal(3)
        c = rng_for(1, 1, 0).standard_normal(3)
        self.assertFalse(np.allclose(a, b))
        self.assertFalse(np.allclose(a, c))

    def test_genspec_validation(self):
        with self.assertRaises(ProblemError):
            GenSpec(p=5, s=6)
        with self.assertRaises(ProblemError):
            GenSpec(n=0)
        with self.assertRaises(ProblemError):
            GenSpec(family="poisson")
        with self.assertRaises(ProblemError):
            GenSpec(design="uniform")
        with self.assertRaises(ProblemError):
            GenSpec(seed=-1)


class TestDatasetFile(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / "data.txt"
        self.spec = GenSpec(p=6, n=4, m=2, s=2, seed=8)
        self.data = generate(self.spec)

    def tearDown(self):
        self.tmp.cleanup()

    def test_save_and_load(self):
        save_dataset(self.path, self.spec, self.data)
        header, data = load_dataset(self.path)
        self.assertEqual(header["p"], 6)
        self.assertEqual(header["family"], Family.LINEAR)
        self.assertEqual(data.support, self.data.support)
        self.assertEqual(data.B_star.entries.tobytes(), self.data.B_star.entries.tobytes())
        for a, b in zip(data.tasks, self.data.tasks):
            self.assertEqual(a.X.tobytes(), b.X.tobytes())
            self.assertEqual(a.y.tobytes(), b.y.tobytes())

    def test_bad_magic(self):
        self.path.write_text("hello\n")
        with self.assertRaises(DataFormatError) as ctx:
            load_dataset(self.path)
        self.assertEqual(ctx.exception.line, 1)

    def test_truncated(self):
        save_dataset(self.path, self.spec, self.data)
        lines = self.path.read_text().splitlines()
        self.path.write_text("\n".join(lines[:-2]) + "\n")
        with self.assertRaises(DataFormatError) as ctx:
            load_dataset(self.path)
        self.assertIn("unexpected end of file", str(ctx.exception))

    def test_bad_value_line(self):
        save_dataset(self.path, self.spec, self.data)
        lines = self.path.read_text().splitlines()
        # magic, header, values, support, task, beta, first sample
        lines[6] = "x" + lines[6]
        self.path.write_text("\n".join(lines) + "\n")
        with self.assertRaises(DataFormatError) as ctx:
            load_dataset(self.path)
        self.assertEqual(ctx.exception.line, 7)
        self.assertTrue(str(ctx.exception).startswith("line 7:"))
