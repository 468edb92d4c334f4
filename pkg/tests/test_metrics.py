#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_metrics
----------------------------------

Tests for `dsml.metrics` module.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose

from dsml.core import CoefficientMatrix, SupportSet, TaskData
from dsml.errors import ProblemError
from dsml.metrics import (
    estimation_error,
    evaluate,
    hamming,
    prediction_error,
    prediction_error_in_sample,
    row_support,
)


class TestHamming(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(hamming(SupportSet((1, 2)), SupportSet((1, 2))), 0)
        self.assertEqual(hamming(SupportSet((1, 2)), SupportSet((2, 3))), 2)
        self.assertEqual(hamming(SupportSet(), SupportSet(tuple(range(10)))), 10)

    def test_dimension_mismatch(self):
        with self.assertRaises(ProblemError):
            hamming(SupportSet((1,), 4), SupportSet((1,), 5))


class TestErrors(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(0)
        self.A = rng.standard_normal((5, 3))
        self.B = rng.standard_normal((5, 3))

    def test_estimation_examples(self):
        self.assertEqual(estimation_error(self.B, self.B), 0.0)
        B_tilde = self.B.copy()
        B_tilde[2] += [3.0, 4.0, 0.0]
        self.assertAlmostEqual(estimation_error(B_tilde, self.B), 5.0)

    def test_estimation_naive(self):
        naive = 0.0
        for j in range(5):
            naive += sum((self.A[j, t] - self.B[j, t]) ** 2 for t in range(3)) ** 0.5
        self.assertAlmostEqual(estimation_error(CoefficientMatrix(self.A), CoefficientMatrix(self.B)), naive, places=12)

    def test_prediction_examples(self):
        Sigmas = [np.eye(5)] * 3
        self.assertEqual(prediction_error(self.B, self.B, Sigmas), 0.0)
        D = self.A - self.B
        self.assertAlmostEqual(prediction_error(self.A, self.B, Sigmas), np.mean(np.sum(D ** 2, axis=0)), places=12)

    def test_prediction_quadratic_form(self):
        rng = np.random.default_rng(1)
        Sigmas = []
        for _ in range(3):
            R = rng.standard_normal((5, 5))
            Sigmas.append(R @ R.T)
        D = self.A - self.B
        expected = sum(D[:, t] @ Sigmas[t] @ D[:, t] for t in range(3)) / 3
        self.assertAlmostEqual(prediction_error(self.A, self.B, Sigmas, n=10, m=3), expected, places=10)
        with self.assertRaises(ProblemError):
            prediction_error(self.A, self.B, Sigmas, m=4)

    def test_in_sample(self):
        rng = np.random.default_rng(2)
        tasks = [TaskData(rng.standard_normal((7, 5)), np.zeros(7)) for _ in range(3)]
        D = self.A - self.B
        expected = sum(np.sum((tasks[t].X @ D[:, t]) ** 2) for t in range(3)) / 21
        self.assertAlmostEqual(prediction_error_in_sample(self.A, self.B, tasks), expected, places=10)

    def test_shape_mismatch(self):
        with self.assertRaises(ProblemError):
            estimation_error(self.A, self.B[:4])

    def test_permutation_invariance(self):
        perm = np.random.default_rng(3).permutation(5)
        Sigma = np.cov(np.random.default_rng(4).standard_normal((20, 5)), rowvar=False)
        Sigma_perm = Sigma[np.ix_(perm, perm)]
        self.assertAlmostEqual(estimation_error(self.A, self.B), estimation_error(self.A[perm], self.B[perm]))
        self.assertAlmostEqual(
            prediction_error(self.A, self.B, [Sigma] * 3),
            prediction_error(self.A[perm], self.B[perm], [Sigma_perm] * 3),
        )
        S, T = row_support(np.where(self.A > 1, self.A, 0)), SupportSet((0, 3), 5)
        inverse = np.argsort(perm)
        S_perm = SupportSet.of((inverse[j] for j in S), 5)
        T_perm = SupportSet.of((inverse[j] for j in T), 5)
        self.assertEqual(hamming(S, T), hamming(S_perm, T_perm))


class TestEvaluate(unittest.TestCase):
    def test_local_supports(self):
        B_star = CoefficientMatrix(np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]]))
        B_tilde = np.array([[1.0, 1.0], [0.5, 0.0], [0.0, 0.0]])
        truth = SupportSet((0,), 3)
        tasks = [TaskData(np.eye(3), np.zeros(3)), TaskData(np.eye(3), np.zeros(3))]
        metrics = evaluate(B_tilde, B_star, truth, [np.eye(3)] * 2, tasks)
        self.assertEqual(metrics.hamming, 1)
        self.assertEqual(metrics.mean_task_hamming, 0.5)
        self.assertAlmostEqual(metrics.est_error_l1l2, 0.5)
        assert_allclose(metrics.per_task_pred, [0.25, 0.0])
        self.assertAlmostEqual(metrics.pred_error, 0.125)
        self.assertAlmostEqual(metrics.pred_error_in_sample, 0.25 / 6)

    def test_row_support(self):
        self.assertEqual(row_support(np.array([[0.0, 0.0], [0.0, -1.0], [2.0, 0.0]])), SupportSet((1, 2), 3))
