#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_solvers
----------------------------------

Tests for `dsml.solvers` module.
"""

import math
import unittest
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose

from dsml.core import CoefficientMatrix, Family, SolverOptions, SupportSet, TaskData
from dsml.errors import DsmlWarning, ProblemError
from dsml.solvers import (
    GroupLassoFit,
    default_lambda,
    group_lasso_path,
    lambda_max_group_lasso,
    lambda_max_lasso,
    lambda_max_logistic,
    lasso_path,
    logistic_gradient,
    logistic_loss,
    logistic_on_support,
    soft_threshold,
    solve_group_lasso,
    solve_lasso,
    solve_logistic_lasso,
)


def _linear(n, p, seed, beta=None, noise=0.5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p) if beta is None else np.asarray(beta, dtype=float)
    return X, X @ beta + noise * rng.standard_normal(n)


def _logistic(n, p, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = scale * rng.standard_normal(p)
    prob = 1.0 / (1.0 + np.exp(-X @ beta))
    y = np.where(rng.uniform(size=n) < prob, 1.0, -1.0)
    return X, y


def _assert_monotone(testcase, objectives):
    objectives = np.asarray(objectives)
    slack = 1e-12 * np.maximum(1.0, np.abs(objectives[:-1]))
    testcase.assertTrue(np.all(np.diff(objectives) <= slack), "objective increased")


class TestSoftThreshold(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(soft_threshold(3.0, 1.0), 2.0)
        self.assertEqual(soft_threshold(-0.5, 1.0), 0.0)
        self.assertEqual(soft_threshold(-3.0, 1.0), -2.0)

    def test_vector_and_negative_tau(self):
        assert_allclose(soft_threshold(np.array([2.0, -0.1]), 0.5), [1.5, 0.0])
        with self.assertRaises(ProblemError):
            soft_threshold(1.0, -0.1)


class TestLasso(unittest.TestCase):
    def test_orthonormal_design(self):
        X = math.sqrt(2) * np.eye(2)
        y = math.sqrt(2) * np.array([1.0, 0.2])
        fit = solve_lasso(X, y, SolverOptions(lam=0.6))
        assert_allclose(fit.beta, [0.7, 0.0], atol=1e-12)
        self.assertTrue(fit.converged)

    def test_null_solution(self):
        X, y = _linear(30, 6, 0, beta=[1, 0, 0, 2, 0, 0])
        lam = lambda_max_lasso(X, y)
        self.assertAlmostEqual(lam, 2.0 / 30 * np.max(np.abs(X.T @ y)))
        fit = solve_lasso(X, y, SolverOptions(lam=lam))
        self.assertTrue(np.all(fit.beta == 0.0))

    def test_kkt_conditions(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            X = rng.standard_normal((40, 20))
            beta = np.zeros(20)
            beta[rng.choice(20, 4, replace=False)] = rng.uniform(-2, 2, 4)
            y = X @ beta + 0.5 * rng.standard_normal(40)
            for lam in (0.01, 0.1, 1.0):
                fit = solve_lasso(X, y, SolverOptions(lam=lam))
                self.assertTrue(fit.converged)
                g = 2.0 * X.T @ (y - X @ fit.beta) / 40
                active = fit.beta != 0.0
                assert_allclose(g[active], lam * np.sign(fit.beta[active]), atol=1e-6)
                self.assertTrue(np.all(np.abs(g[~active]) <= lam + 1e-6))
                _assert_monotone(self, fit.objectives)

    def test_grid_search(self):
        X, y = _linear(20, 2, 4, beta=[1.0, -0.5])
        lam = 0.2
        n = 20
        yy, Xy, G = y @ y, X.T @ y, X.T @ X

        def objective(b1, b2):
            quad = G[0, 0] * b1 ** 2 + 2 * G[0, 1] * b1 * b2 + G[1, 1] * b2 ** 2
            return (yy - 2 * (Xy[0] * b1 + Xy[1] * b2) + quad) / n + lam * (np.abs(b1) + np.abs(b2))

        coarse = np.arange(-3.0, 3.0 + 1e-9, 1e-2)
        B1, B2 = np.meshgrid(coarse, coarse, indexing="ij")
        i, j = np.unravel_index(np.argmin(objective(B1, B2)), B1.shape)
        fine1 = np.arange(coarse[i] - 0.02, coarse[i] + 0.02 + 1e-9, 1e-3)
        fine2 = np.arange(coarse[j] - 0.02, coarse[j] + 0.02 + 1e-9, 1e-3)
        F1, F2 = np.meshgrid(fine1, fine2, indexing="ij")
        k, l = np.unravel_index(np.argmin(objective(F1, F2)), F1.shape)

        fit = solve_lasso(X, y, SolverOptions(lam=lam))
        assert_allclose(fit.beta, [fine1[k], fine2[l]], atol=2e-3)

    def test_path_matches_cold_fits(self):
        X, y = _linear(40, 10, 5, beta=[2, -1, 0, 0, 1, 0, 0, 0, 0, 0])
        opts = SolverOptions(tol=1e-10)
        lambdas = np.geomspace(lambda_max_lasso(X, y), 0.01, 6)
        for lam, fit in zip(lambdas, lasso_path(X, y, lambdas, opts)):
            self.assertEqual(fit.lam, lam)
            assert_allclose(fit.beta, solve_lasso(X, y, opts.with_lambda(lam)).beta, atol=1e-6)

    def test_l1_norm_decreasing_in_lambda(self):
        for seed in range(20):
            X, y = _linear(30, 12, seed, beta=[1.5, -1, 0.5] + [0] * 9)
            lambdas = np.geomspace(lambda_max_lasso(X, y), 1e-3, 15)
            norms = [np.abs(solve_lasso(X, y, SolverOptions(lam=lam, tol=1e-10)).beta).sum() for lam in lambdas]
            for larger_lam, smaller_lam in zip(norms, norms[1:]):
                self.assertLessEqual(larger_lam, smaller_lam + 1e-6 * (1.0 + smaller_lam))

    def test_lambda_required(self):
        X, y = _linear(5, 2, 0)
        with self.assertRaises(ProblemError):
            solve_lasso(X, y, SolverOptions())

    def test_not_converged_is_flagged(self):
        X, y = _linear(40, 10, 6, beta=np.ones(10))
        fit = solve_lasso(X, y, SolverOptions(max_iter=1, tol=1e-15, lam=0.01))
        self.assertFalse(fit.converged)
        self.assertEqual(fit.iterations, 1)

    def test_default_lambda(self):
        self.assertAlmostEqual(default_lambda(1.0, 100, 200), 4.0 * math.sqrt(math.log(200) / 100))


class TestLogisticLasso(unittest.TestCase):
    def test_null_solution(self):
        X, y = _logistic(50, 5, 0)
        lam = lambda_max_logistic(X, y)
        assert_allclose(np.max(np.abs(logistic_gradient(X, y, np.zeros(5)))), lam, rtol=1e-12)
        fit = solve_logistic_lasso(X, y, SolverOptions(lam=lam))
        self.assertTrue(np.all(fit.beta == 0.0))

    def test_gradient_finite_differences(self):
        rng = np.random.default_rng(7)
        h = 1e-5
        for seed in range(20):
            X, y = _logistic(30, 4, seed)
            beta = rng.standard_normal(4)
            fd = np.empty(4)
            for j in range(4):
                e = np.zeros(4)
                e[j] = h
                fd[j] = (logistic_loss(X, y, beta + e) - logistic_loss(X, y, beta - e)) / (2 * h)
            assert_allclose(logistic_gradient(X, y, beta), fd, rtol=1e-5, atol=1e-9)

    def test_sign_symmetry(self):
        X, y = _logistic(60, 5, 3)
        opts = SolverOptions(lam=0.02)
        assert_allclose(solve_logistic_lasso(X, -y, opts).beta, -solve_logistic_lasso(X, y, opts).beta, atol=1e-10)

    def test_monotone_and_kkt(self):
        X, y = _logistic(80, 6, 4, scale=0.5)
        lam = 0.02
        fit = solve_logistic_lasso(X, y, SolverOptions(lam=lam, tol=1e-10))
        self.assertTrue(fit.converged)
        _assert_monotone(self, fit.objectives)
        g = logistic_gradient(X, y, fit.beta)
        active = fit.beta != 0.0
        assert_allclose(g[active], -lam * np.sign(fit.beta[active]), atol=1e-6)
        self.assertTrue(np.all(np.abs(g[~active]) <= lam + 1e-6))

    def test_zero_lambda_warns(self):
        X, y = _logistic(40, 2, 5)
        with self.assertWarns(DsmlWarning):
            solve_logistic_lasso(X, y, SolverOptions(lam=0.0, max_iter=50))

    def test_labels_checked(self):
        X, _ = _logistic(10, 2, 0)
        with self.assertRaises(ProblemError):
            solve_logistic_lasso(X, np.zeros(10), SolverOptions(lam=0.1))

    def test_refit_on_support(self):
        X, y = _logistic(200, 5, 8, scale=0.5)
        fit = logistic_on_support(X, y, SupportSet((0, 3), 5), SolverOptions(tol=1e-10))
        self.assertTrue(np.all(fit.beta[[1, 2, 4]] == 0.0))
        assert_allclose(logistic_gradient(X[:, [0, 3]], y, fit.beta[[0, 3]]), 0.0, atol=1e-6)
        empty = logistic_on_support(X, y, SupportSet(), SolverOptions())
        self.assertTrue(np.all(empty.beta == 0.0))


class TestGroupLasso(unittest.TestCase):
    def test_single_task_reduces_to_lasso(self):
        X, y = _linear(50, 5, 9, beta=[1, 0, -1, 0, 0.5])
        opts = SolverOptions(lam=0.1, tol=1e-12, max_iter=100000)
        group = solve_group_lasso([TaskData(X, y)], opts)
        lasso = solve_lasso(X, y, opts)
        assert_allclose(group.B.column(0), lasso.beta, atol=1e-6)

    def test_null_solution(self):
        tasks = [TaskData(*_linear(30, 4, seed, beta=[1, 0, 0, 1])) for seed in range(3)]
        fit = solve_group_lasso(tasks, SolverOptions(lam=lambda_max_group_lasso(tasks) * (1 + 1e-9)))
        self.assertTrue(np.all(fit.B.entries == 0.0))

    def test_grid_search(self):
        tasks = [
            TaskData(*_linear(20, 2, 11, beta=[1.0, 0.2])),
            TaskData(*_linear(20, 2, 12, beta=[0.8, -0.1])),
        ]
        lam = 0.1
        mn = 40.0
        parts = [(t.y @ t.y, t.X.T @ t.y, t.X.T @ t.X) for t in tasks]

        def objective(b11, b21, b12, b22):
            total = 0.0
            for (yy, Xy, G), (u, v) in zip(parts, ((b11, b21), (b12, b22))):
                quad = G[0, 0] * u ** 2 + 2 * G[0, 1] * u * v + G[1, 1] * v ** 2
                total = total + yy - 2 * (Xy[0] * u + Xy[1] * v) + quad
            return total / mn + lam * (np.sqrt(b11 ** 2 + b12 ** 2) + np.sqrt(b21 ** 2 + b22 ** 2))

        def search(centers, half, step):
            axes = [np.arange(c - half, c + half + 1e-9, step) for c in centers]
            grids = np.meshgrid(*axes, indexing="ij")
            idx = np.unravel_index(np.argmin(objective(*grids)), grids[0].shape)
            return np.array([axis[i] for axis, i in zip(axes, idx)])

        best = search([0.5, 0.0, 0.5, 0.0], 1.5, 0.1)
        best = search(best, 0.15, 0.01)

        fit = solve_group_lasso(tasks, SolverOptions(lam=lam, tol=1e-10))
        B = fit.B.entries
        assert_allclose([B[0, 0], B[1, 0], B[0, 1], B[1, 1]], best, atol=2e-2)
        _assert_monotone(self, fit.objectives)

    def test_logistic_family(self):
        tasks = [TaskData(*_logistic(60, 4, seed), family=Family.LOGISTIC) for seed in range(3)]
        top = lambda_max_group_lasso(tasks)
        self.assertTrue(np.all(solve_group_lasso(tasks, SolverOptions(lam=top * (1 + 1e-9))).B.entries == 0.0))
        fit = solve_group_lasso(tasks, SolverOptions(lam=top / 4))
        self.assertTrue(fit.converged)
        self.assertTrue(np.any(fit.B.entries != 0.0))
        _assert_monotone(self, fit.objectives)

    def test_path_keeps_order(self):
        tasks = [TaskData(*_linear(40, 6, seed, beta=[2, 1, 0, 0, 0, 0])) for seed in range(4)]
        top = lambda_max_group_lasso(tasks)
        lambdas = [top * 0.1, top * (1 + 1e-9), top * 0.5]
        fits = group_lasso_path(tasks, lambdas, SolverOptions())
        self.assertEqual([fit.lam for fit in fits], lambdas)
        self.assertTrue(np.all(fits[1].B.entries == 0.0))
        self.assertTrue(np.any(fits[0].B.entries != 0.0))

    def test_path_logs_lost_rows(self):
        tasks = [TaskData(*_linear(20, 3, seed)) for seed in range(2)]
        wide = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
        narrow = np.array([[0.0, 0.0], [2.0, 2.0], [1.0, 1.0]])
        fits = [
            GroupLassoFit(CoefficientMatrix(wide), 1, 0.0, True, lam=0.5),
            GroupLassoFit(CoefficientMatrix(narrow), 1, 0.0, True, lam=0.1),
        ]
        with mock.patch("dsml.solvers.solve_group_lasso", side_effect=fits):
            with self.assertLogs("dsml.solvers", level="WARNING") as logs:
                group_lasso_path(tasks, [0.1, 0.5], SolverOptions())
        self.assertEqual(len(logs.records), 1)
        self.assertIn("lost rows [0]", logs.output[0])
