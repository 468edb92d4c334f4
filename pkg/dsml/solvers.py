# -*- coding: utf-8 -*-
# This file is part of dsml.

# Copyright (C) 2017-present qytz <hhhhhf@foxmail.com>
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Penalized estimators

* :func:`solve_lasso`, per task least squares lasso by cyclic coordinate descent.
* :func:`solve_logistic_lasso`, l1 penalized logistic regression by proximal gradient.
* :func:`solve_group_lasso`, the centralized l1/l2 multi-task estimator by proximal gradient.

Objectives::

    lasso:           (1/n) ||y - X b||^2 + lam ||b||_1
    logistic lasso:  (1/n) sum_k log(1 + exp(-y_k X_k b)) + lam ||b||_1
    group lasso:     (1/(mn)) sum_t loss_t(b_t) + lam sum_j ||B_j||_2
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .core import CoefficientMatrix, Family, SolverOptions, SupportSet, TaskData, gram, validate_problem
from .errors import DsmlWarning, ProblemError
from .metrics import row_support

logger = logging.getLogger(__name__)

# sufficient decrease constant of the backtracking line search
ARMIJO_C = 1e-4
MIN_STEP = 1e-20


@dataclass(frozen=True, eq=False)
class LassoFit:
    """result of a single task penalized fit

    :param beta: length p coefficients
    :param iterations: sweeps (coordinate descent) or proximal steps used
    :param objective: final objective value
    :param converged: whether the parameter change fell below tol
    :param objectives: objective after every iteration, starting with the initial point
    """

    beta: np.ndarray
    iterations: int
    objective: float
    converged: bool
    objectives: Tuple[float, ...] = ()
    lam: float = 0.0


@dataclass(frozen=True, eq=False)
class GroupLassoFit:
    """result of a group lasso fit, same fields as :class:`LassoFit` with a matrix"""

    B: CoefficientMatrix
    iterations: int
    objective: float
    converged: bool
    objectives: Tuple[float, ...] = ()
    lam: float = 0.0


def soft_threshold(z, tau):
    """sign(z) * max(|z| - tau, 0), works on scalars and arrays"""
    if tau < 0:
        raise ProblemError("threshold must be non-negative, got %s" % tau)
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def default_lambda(sigma: float, n: int, p: int) -> float:
    """4 sigma sqrt(log p / n)"""
    return 4.0 * sigma * math.sqrt(math.log(p) / n)


def default_group_lambda(sigma: float, n: int, p: int, m: int) -> float:
    """4 sigma sqrt((m + log p) / n) / m, the group analogue of :func:`default_lambda`

    matches the scale of the row-wise noise gradient under the 1/(mn) normalization.
    """
    return 4.0 * sigma * math.sqrt((m + math.log(p)) / n) / m


def _require_lambda(opts: SolverOptions) -> float:
    if opts.lam is None:
        raise ProblemError("solver options carry no lambda")
    return float(opts.lam)


# --- least squares lasso ---
def lasso_objective(X, y, beta, lam):
    r = y - X @ beta
    return float(r @ r) / X.shape[0] + lam * float(np.abs(beta).sum())


def lambda_max_lasso(X, y) -> float:
    """smallest lambda for which the lasso solution is zero"""
    return 2.0 * float(np.max(np.abs(X.T @ y))) / X.shape[0]


def solve_lasso(X, y, opts: SolverOptions, init: Optional[np.ndarray] = None) -> LassoFit:
    """cyclic coordinate descent with covariance updates.

    the gradient vector ``X^T (y - X b) / n`` is kept up to date after every
    coordinate move, a sweep costs O(p^2).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = _require_lambda(opts)
    n, p = X.shape
    G = gram(X)
    diag = np.diag(G).copy()
    beta = np.zeros(p) if init is None else np.array(init, dtype=float)
    grad = X.T @ y / n - G @ beta
    half = lam / 2.0

    objectives = [lasso_objective(X, y, beta, lam)]
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        max_delta = 0.0
        for j in range(p):
            old = beta[j]
            if diag[j] <= 0.0:
                new = 0.0
            else:
                z = grad[j] + diag[j] * old
                new = math.copysign(max(abs(z) - half, 0.0), z) / diag[j]
            if new != old:
                delta = new - old
                grad -= G[:, j] * delta
                beta[j] = new
                max_delta = max(max_delta, abs(delta))
        objectives.append(lasso_objective(X, y, beta, lam))
        if max_delta < opts.tol:
            converged = True
            break
    if not converged:
        logger.warning("lasso did not converge in %d sweeps (lambda=%g)", opts.max_iter, lam)
    return LassoFit(beta, iterations, objectives[-1], converged, tuple(objectives), lam)


def lasso_path(X, y, lambdas: Sequence[float], opts: SolverOptions) -> List[LassoFit]:
    """fit a sequence of lambdas, each warm started from the previous one

    pass lambdas in decreasing order to get the benefit of warm starts.
    """
    fits = []
    beta = None
    for lam in lambdas:
        fit = solve_lasso(X, y, opts.with_lambda(lam), init=beta)
        beta = fit.beta
        fits.append(fit)
    return fits


def logistic_lasso_path(X, y, lambdas: Sequence[float], opts: SolverOptions) -> List[LassoFit]:
    """warm started logistic lasso fits, see :func:`lasso_path`"""
    fits = []
    beta = None
    for lam in lambdas:
        fit = solve_logistic_lasso(X, y, opts.with_lambda(lam), init=beta)
        beta = fit.beta
        fits.append(fit)
    return fits


# --- logistic lasso ---
def logistic_loss(X, y, beta) -> float:
    """(1/n) sum_k log(1 + exp(-y_k X_k beta))"""
    return float(np.mean(np.logaddexp(0.0, -y * (X @ beta))))


def logistic_gradient(X, y, beta) -> np.ndarray:
    return -(X.T @ (y * expit(-y * (X @ beta)))) / X.shape[0]


def lambda_max_logistic(X, y) -> float:
    """infinity norm of the logistic gradient at zero"""
    return float(np.max(np.abs(X.T @ y))) / (2.0 * X.shape[0])


def _logistic_prox_gradient(X, y, lam, opts, init):
    n, p = X.shape
    beta = np.zeros(p) if init is None else np.array(init, dtype=float)
    F = logistic_loss(X, y, beta) + lam * float(np.abs(beta).sum())
    objectives = [F]
    step = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        g = logistic_gradient(X, y, beta)
        t = step
        while True:
            z = soft_threshold(beta - t * g, t * lam)
            d = z - beta
            Fz = logistic_loss(X, y, z) + lam * float(np.abs(z).sum())
            if Fz <= F - ARMIJO_C / t * float(d @ d) or t < MIN_STEP:
                break
            t /= 2.0
        if Fz > F:  # step collapsed, keep the current point
            d = np.zeros(p)
            z, Fz = beta, F
        beta, F = z, Fz
        objectives.append(F)
        step = min(1.0, 2.0 * t)
        if np.max(np.abs(d)) < opts.tol:
            converged = True
            break
    if not converged:
        logger.warning("logistic lasso did not converge in %d iterations (lambda=%g)", opts.max_iter, lam)
    return LassoFit(beta, iterations, F, converged, tuple(objectives), lam)


def solve_logistic_lasso(X, y, opts: SolverOptions, init: Optional[np.ndarray] = None) -> LassoFit:
    """proximal gradient with backtracking, initial step 1.0 and halving."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = _require_lambda(opts)
    if not np.all(np.abs(y) == 1.0):
        raise ProblemError("logistic responses must be in {-1, +1}")
    if lam == 0.0:
        msg = "unpenalized logistic regression has no finite solution on separable data"
        logger.warning(msg)
        warnings.warn(msg, DsmlWarning)
    return _logistic_prox_gradient(X, y, lam, opts, init)


def logistic_on_support(X, y, support: SupportSet, opts: SolverOptions) -> LassoFit:
    """unpenalized logistic refit restricted to `support`, zero elsewhere.

    the fit is flagged with converged=False when the data are separable on the support.
    """
    X = np.asarray(X, dtype=float)
    beta = np.zeros(X.shape[1])
    if not len(support):
        return LassoFit(beta, 0, logistic_loss(X, y, beta), True, (), 0.0)
    idx = support.as_array()
    fit = _logistic_prox_gradient(X[:, idx], np.asarray(y, dtype=float), 0.0, opts, None)
    beta[idx] = fit.beta
    return LassoFit(beta, fit.iterations, fit.objective, fit.converged, fit.objectives, 0.0)


# --- group lasso ---
class _MultiTaskLoss(object):
    """smooth part of the group lasso objective over stacked tasks"""

    def __init__(self, tasks: List[TaskData]):
        self.n, self.p, self.m = validate_problem(tasks)
        self.family = tasks[0].family
        self.Xs = [task.X for task in tasks]
        self.ys = [task.y for task in tasks]
        scale = 2.0 if self.family == Family.LINEAR else 0.25
        self.lipschitz = scale * max(np.linalg.norm(X, 2) ** 2 for X in self.Xs) / (self.m * self.n)

    def value(self, B) -> float:
        total = 0.0
        for t, (X, y) in enumerate(zip(self.Xs, self.ys)):
            if self.family == Family.LINEAR:
                r = y - X @ B[:, t]
                total += float(r @ r)
            else:
                total += float(np.sum(np.logaddexp(0.0, -y * (X @ B[:, t]))))
        return total / (self.m * self.n)

    def gradient(self, B) -> np.ndarray:
        G = np.empty_like(B)
        for t, (X, y) in enumerate(zip(self.Xs, self.ys)):
            if self.family == Family.LINEAR:
                G[:, t] = -2.0 * (X.T @ (y - X @ B[:, t]))
            else:
                G[:, t] = -(X.T @ (y * expit(-y * (X @ B[:, t]))))
        return G / (self.m * self.n)


def group_soft_threshold(V: np.ndarray, tau: float) -> np.ndarray:
    """row-wise prox of tau * sum_j ||V_j||_2"""
    norms = np.linalg.norm(V, axis=1)
    scale = np.zeros_like(norms)
    keep = norms > tau
    scale[keep] = 1.0 - tau / norms[keep]
    return V * scale[:, np.newaxis]


def group_penalty(B) -> float:
    return float(np.linalg.norm(B, axis=1).sum())


def lambda_max_group_lasso(tasks: List[TaskData]) -> float:
    """largest row norm of the smooth gradient at zero"""
    loss = _MultiTaskLoss(tasks)
    G = loss.gradient(np.zeros((loss.p, loss.m)))
    return float(np.max(np.linalg.norm(G, axis=1)))


def solve_group_lasso(
    tasks: List[TaskData], opts: SolverOptions, init: Optional[np.ndarray] = None
) -> GroupLassoFit:
    """proximal gradient over the full p x m matrix with backtracking.

    works for linear and logistic families, the step starts at 1/L and
    doubles after every accepted step.
    """
    lam = _require_lambda(opts)
    loss = _MultiTaskLoss(tasks)
    p, m = loss.p, loss.m
    B = np.zeros((p, m)) if init is None else np.array(init, dtype=float).reshape(p, m)
    f = loss.value(B)
    F = f + lam * group_penalty(B)
    objectives = [F]
    step = 1.0 / loss.lipschitz if loss.lipschitz > 0 else 1.0
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        g = loss.gradient(B)
        t = step
        while True:
            Z = group_soft_threshold(B - t * g, t * lam)
            D = Z - B
            fz = loss.value(Z)
            Fz = fz + lam * group_penalty(Z)
            if Fz <= F - ARMIJO_C / t * float(np.sum(D * D)) or t < MIN_STEP:
                break
            t /= 2.0
        if Fz > F:
            D = np.zeros_like(B)
            Z, Fz = B, F
        B, F = Z, Fz
        objectives.append(F)
        step = 2.0 * t
        if np.max(np.abs(D)) < opts.tol:
            converged = True
            break
    if not converged:
        logger.warning("group lasso did not converge in %d iterations (lambda=%g)", opts.max_iter, lam)
    return GroupLassoFit(CoefficientMatrix(B), iterations, F, converged, tuple(objectives), lam)


def group_lasso_path(tasks: List[TaskData], lambdas: Sequence[float], opts: SolverOptions) -> List[GroupLassoFit]:
    """fit lambdas from the largest to the smallest with warm starts.

    fits come back in the order of `lambdas`. the row supports are expected,
    but not guaranteed, to grow as lambda decreases; violations are logged.
    """
    order = sorted(range(len(lambdas)), key=lambda i: -lambdas[i])
    fits = [None] * len(lambdas)
    B = None
    prev = None
    for i in order:
        fit = solve_group_lasso(tasks, opts.with_lambda(lambdas[i]), init=B)
        B = fit.B.entries
        support = row_support(B)
        if prev is not None and not set(prev.indices) <= set(support.indices):
            logger.warning(
                "group lasso support not nested at lambda=%g: lost rows %s",
                lambdas[i],
                sorted(set(prev.indices) - set(support.indices)),
            )
        prev = support
        fits[i] = fit
    return fits
