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
"""Debiasing of lasso estimates.

The rows of the inverse surrogate M solve::

    min_m  m^T S m   subject to  ||S m - e_j||_inf <= mu

which is computed through the equivalent penalized program
``1/2 m^T S m - m_j + mu ||m||_1`` by coordinate descent, one independent
problem per row (the construction of the decorrelating matrix used for
debiased lasso inference).
"""
import hashlib
import logging
import threading
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Callable, Dict, Hashable, Optional, Tuple

import numpy as np
from scipy.special import expit

from .core import gram
from .errors import InfeasibleError, ProblemError

logger = logging.getLogger(__name__)

OPT_TOL = 1e-7
FEAS_TOL = 1e-8
MU_FACTOR = 1.5
MAX_ESCALATIONS = 20
MAX_SWEEPS = 1000
# |M| above this bound means the penalized program is unbounded at the current mu
BLOWUP = 1e8


@dataclass(frozen=True, eq=False)
class InverseSurrogate:
    """approximate inverse of a Gram/Hessian matrix

    :param M: p x p matrix, row j approximately inverts the j-th column
    :param mu: constraint level actually used
    :param feasibility_slack: max_j ||S m_j - e_j||_inf achieved
    :param mu_escalations: number of infeasibility driven increases of mu
    """

    M: np.ndarray
    mu: float
    feasibility_slack: float
    mu_escalations: int = 0


@dataclass(frozen=True, eq=False)
class LogisticWeights:
    """diagonal of the logistic Hessian weighting, every entry in (0, 0.25]"""

    w: np.ndarray


class _RowsInfeasible(Exception):
    def __init__(self, rows):
        super().__init__("rows %s infeasible" % (list(rows)[:10],))
        self.rows = rows


def _solve_rows(Sigma: np.ndarray, rows: np.ndarray, mu: float, opt_tol: float, max_sweeps: int) -> np.ndarray:
    """coordinate descent on the penalized program for the given rows at once.

    every row is an independent problem; a row leaves the active set when its
    stationarity violation is below opt_tol and it is feasible.
    """
    p = Sigma.shape[0]
    k = len(rows)
    diag = np.diag(Sigma)
    zero = 1e-14 * max(float(np.max(diag)), 1.0)

    singular = [i for i in rows if diag[i] <= zero]
    if singular and mu < 1.0:
        raise _RowsInfeasible(singular)

    E = np.zeros((k, p))
    E[np.arange(k), rows] = 1.0
    M = np.zeros((k, p))
    R = np.zeros((k, p))  # R = M @ Sigma
    active = np.arange(k)
    for sweep in range(1, max_sweeps + 1):
        for j in range(p):
            d = diag[j]
            if d <= zero:
                continue
            col = M[active, j]
            z = E[active, j] - R[active, j] + d * col
            new = np.sign(z) * np.maximum(np.abs(z) - mu, 0.0) / d
            delta = new - col
            changed = delta != 0.0
            if changed.any():
                idx = active[changed]
                M[idx, j] = new[changed]
                R[idx] += np.outer(delta[changed], Sigma[j])

        R[active] = M[active] @ Sigma
        Ma = M[active]
        resid = R[active] - E[active]
        viol = np.where(Ma != 0.0, np.abs(resid + mu * np.sign(Ma)), np.maximum(np.abs(resid) - mu, 0.0))
        done = (viol.max(axis=1) <= opt_tol) & (np.abs(resid).max(axis=1) <= mu + FEAS_TOL)
        if np.abs(Ma).max(initial=0.0) > BLOWUP:
            raise _RowsInfeasible(rows[active[np.abs(Ma).max(axis=1) > BLOWUP]])
        active = active[~done]
        if not active.size:
            logger.debug("surrogate rows converged in %d sweeps", sweep)
            return M
    raise _RowsInfeasible(rows[active])


def compute_M(
    Sigma_hat: np.ndarray,
    mu: float,
    opt_tol: float = OPT_TOL,
    max_sweeps: int = MAX_SWEEPS,
    executor: Optional[Executor] = None,
    chunks: int = 1,
) -> InverseSurrogate:
    """inverse surrogate of a PSD matrix

    when infeasible, mu is multiplied by 1.5 up to 20 times before giving up.
    rows can be split into `chunks` solved on `executor`.
    """
    Sigma = np.asarray(Sigma_hat, dtype=float)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise ProblemError("Sigma must be square, got shape %s" % (Sigma.shape,))
    if not mu > 0:
        raise ProblemError("mu must be positive, got %s" % mu)
    Sigma = (Sigma + Sigma.T) / 2.0
    p = Sigma.shape[0]
    parts = [part for part in np.array_split(np.arange(p), max(1, min(chunks, p))) if part.size]

    level = float(mu)
    escalations = 0
    while True:
        try:
            if executor is None or len(parts) == 1:
                blocks = [_solve_rows(Sigma, part, level, opt_tol, max_sweeps) for part in parts]
            else:
                futures = [executor.submit(_solve_rows, Sigma, part, level, opt_tol, max_sweeps) for part in parts]
                blocks = [f.result() for f in futures]
            break
        except _RowsInfeasible as e:
            if escalations >= MAX_ESCALATIONS:
                raise InfeasibleError(
                    "inverse surrogate infeasible after %d escalations (mu=%g)" % (escalations, level),
                    level,
                    escalations,
                )
            escalations += 1
            logger.info("surrogate infeasible at mu=%g for rows %s, escalate", level, list(e.rows)[:5])
            level *= MU_FACTOR

    M = np.vstack(blocks)
    slack = float(np.max(np.abs(M @ Sigma - np.eye(p))))
    return InverseSurrogate(M, level, slack, escalations)


def surrogate_objectives(M: np.ndarray, Sigma_hat: np.ndarray) -> np.ndarray:
    """m_j^T S m_j for every row"""
    return np.einsum("ij,jk,ik->i", M, Sigma_hat, M)


def debias_linear(X, y, beta_hat, M) -> np.ndarray:
    """beta + M X^T (y - X beta) / n"""
    X = np.asarray(X, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float)
    M = M.M if isinstance(M, InverseSurrogate) else np.asarray(M, dtype=float)
    n, p = X.shape
    if beta_hat.shape != (p,) or M.shape != (p, p):
        raise ProblemError("dimension mismatch: X %s, beta %s, M %s" % (X.shape, beta_hat.shape, M.shape))
    return beta_hat + M @ (X.T @ (np.asarray(y, dtype=float) - X @ beta_hat)) / n


def compute_logistic_weights(X, beta_hat) -> LogisticWeights:
    """W_kk = sigmoid(X_k b) * sigmoid(-X_k b)"""
    eta = np.asarray(X, dtype=float) @ np.asarray(beta_hat, dtype=float)
    w = expit(eta) * expit(-eta)
    w = np.maximum(w, np.finfo(float).tiny)
    return LogisticWeights(w)


def logistic_gram(X, weights: LogisticWeights) -> np.ndarray:
    """X^T W X / n"""
    X = np.asarray(X, dtype=float)
    w = np.asarray(weights.w)
    if np.any(w <= 0):
        raise ProblemError("logistic weights must be positive")
    G = (X.T * w) @ X / X.shape[0]
    return (G + G.T) / 2.0


def compute_M_logistic(X, weights: LogisticWeights, mu: float, **kwargs) -> InverseSurrogate:
    """:func:`compute_M` on the weighted Gram X^T W X / n.

    the 1/n normalization is applied to both objective and constraint.
    """
    return compute_M(logistic_gram(X, weights), mu, **kwargs)


def debias_logistic(X, y, beta_hat, M) -> np.ndarray:
    """beta + M X^T ((y + 1)/2 - sigmoid(X beta)) / n"""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float)
    M = M.M if isinstance(M, InverseSurrogate) else np.asarray(M, dtype=float)
    n, p = X.shape
    if beta_hat.shape != (p,) or M.shape != (p, p):
        raise ProblemError("dimension mismatch: X %s, beta %s, M %s" % (X.shape, beta_hat.shape, M.shape))
    if not np.all(np.abs(y) == 1.0):
        raise ProblemError("logistic responses must be in {-1, +1}")
    return beta_hat + M @ (X.T @ ((y + 1.0) / 2.0 - expit(X @ beta_hat))) / n


def fingerprint(*arrays: np.ndarray) -> str:
    """content hash of arrays, used as cache key of a task"""
    h = hashlib.sha1()
    for arr in arrays:
        arr = np.ascontiguousarray(arr)
        h.update(str(arr.shape).encode())
        h.update(arr.tobytes())
    return h.hexdigest()


class MCache(object):
    """thread safe cache of inverse surrogates keyed by (task key, mu)"""

    def __init__(self):
        self._store: Dict[Tuple[Hashable, float], InverseSurrogate] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get_or_compute(self, key: Hashable, mu: float, compute: Callable[[], InverseSurrogate]) -> InverseSurrogate:
        with self._lock:
            found = self._store.get((key, mu))
            if found is not None:
                self.hits += 1
                return found
        surrogate = compute()
        with self._lock:
            self.misses += 1
            self._store.setdefault((key, mu), surrogate)
            return self._store[(key, mu)]

    def clear(self) -> None:
        with self._lock:
            self._store.clear()

    def __len__(self):
        return len(self._store)


def surrogate_for_task(X, mu: float, cache: Optional[MCache] = None, key: Optional[str] = None) -> InverseSurrogate:
    """M of the linear design X, cached when a cache is given"""
    if cache is None:
        return compute_M(gram(X), mu)
    key = key or fingerprint(X)
    return cache.get_or_compute(key, mu, lambda: compute_M(gram(X), mu))
