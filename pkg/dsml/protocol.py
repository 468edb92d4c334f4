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
"""The one round distributed protocol.

workers::

    lasso fit -> inverse surrogate M -> debiased vector -> upload (p scalars)

master::

    stack uploads into B (p x m) -> keep rows with ||B_j||_2 > threshold -> broadcast support

workers again::

    zero the debiased vector outside the support
"""
import asyncio
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np

from .core import CoefficientMatrix, Family, SolverOptions, SupportSet, TaskData, validate_problem
from .debias import (
    MCache,
    compute_logistic_weights,
    compute_M_logistic,
    debias_linear,
    debias_logistic,
    fingerprint,
    surrogate_for_task,
)
from .dispatcher import Dispatcher
from .errors import DsmlError, ProblemError, ProtocolError, WorkerError
from .log import run_context
from .message import CommStats, DebiasedMessage, SupportBroadcast
from .metrics import hamming
from .solvers import default_lambda, solve_lasso, solve_logistic_lasso

logger = logging.getLogger(__name__)

ORACLE_GRID_SIZE = 50


@dataclass(frozen=True)
class ThresholdRule:
    """how the master picks the group threshold

    * fixed: use ``value``
    * oracle_tuned: the value of ``grid`` (default grid when empty) with the
      smallest Hamming distance to a known support, ties go to the smaller value
    * theoretical: evaluate :func:`theoretical_threshold` on ``params``
    """

    FIXED = "fixed"
    ORACLE_TUNED = "oracle_tuned"
    THEORETICAL = "theoretical"

    kind: str = "oracle_tuned"
    value: float = 0.0
    grid: tuple = ()
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == self.FIXED:
            if not self.value >= 0:
                raise ProblemError("fixed threshold must be >= 0, got %s" % self.value)
        elif self.kind == self.ORACLE_TUNED:
            object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        elif self.kind == self.THEORETICAL:
            pass
        else:
            raise ProblemError("unknown threshold rule %r" % self.kind)

    @classmethod
    def fixed(cls, value: float) -> "ThresholdRule":
        return cls(cls.FIXED, value=value)

    @classmethod
    def oracle(cls, grid: Sequence[float] = ()) -> "ThresholdRule":
        return cls(cls.ORACLE_TUNED, grid=tuple(grid))

    @classmethod
    def theoretical(cls, **params) -> "ThresholdRule":
        return cls(cls.THEORETICAL, params=params)


@dataclass
class DsmlResult:
    """outcome of one protocol run, unpacks as (B, support, stats)"""

    B: CoefficientMatrix
    support: SupportSet
    stats: CommStats
    threshold: float
    messages: List[DebiasedMessage]

    def __iter__(self) -> Iterator:
        return iter((self.B, self.support, self.stats))

    @property
    def converged(self) -> bool:
        return all(msg.converged for msg in self.messages)


# --- worker side ---
def worker_step(
    task: TaskData,
    opts: SolverOptions,
    mu: float,
    task_id: int = 0,
    cache: Optional[MCache] = None,
) -> DebiasedMessage:
    """local lasso, inverse surrogate and debiasing of one task.

    when opts carries no lambda the rule 4 sigma sqrt(log p / n) is used.
    """
    if opts.lam is None:
        opts = opts.with_lambda(default_lambda(task.sigma, task.n, task.p))
    if task.family == Family.LINEAR:
        fit = solve_lasso(task.X, task.y, opts)
        surrogate = surrogate_for_task(task.X, mu, cache)
        beta_u = debias_linear(task.X, task.y, fit.beta, surrogate)
    else:
        fit = solve_logistic_lasso(task.X, task.y, opts)
        weights = compute_logistic_weights(task.X, fit.beta)
        if cache is None:
            surrogate = compute_M_logistic(task.X, weights, mu)
        else:
            surrogate = cache.get_or_compute(
                fingerprint(task.X, weights.w), mu, lambda: compute_M_logistic(task.X, weights, mu)
            )
        beta_u = debias_logistic(task.X, task.y, fit.beta, surrogate)
    if surrogate.mu_escalations:
        logger.info("task %s: surrogate mu escalated %d times to %g", task_id, surrogate.mu_escalations, surrogate.mu)
    return DebiasedMessage(task_id, beta_u, converged=fit.converged, mu=surrogate.mu)


def worker_finalize(message: DebiasedMessage, broadcast: SupportBroadcast) -> np.ndarray:
    """keep the debiased entries on the broadcast support, zero the rest"""
    support = broadcast.support
    if support.p is not None and support.p != message.p:
        raise ProtocolError("support over p=%s, message has p=%s" % (support.p, message.p), message.task_id)
    out = np.zeros(message.p)
    idx = support.as_array()
    if idx.size and idx[-1] >= message.p:
        raise ProtocolError("support index %s out of range" % idx[-1], message.task_id)
    out[idx] = message.beta_u[idx]
    return out


# --- master side ---
def stack_messages(messages: Sequence[DebiasedMessage]) -> CoefficientMatrix:
    """p x m matrix with columns ordered by task id"""
    if not messages:
        raise ProtocolError("no messages")
    p = messages[0].p
    for msg in messages:
        if msg.p != p:
            raise ProtocolError("inconsistent message length %d, expected %d" % (msg.p, p), msg.task_id)
    ordered = sorted(messages, key=lambda msg: msg.task_id)
    return CoefficientMatrix.from_columns([msg.beta_u for msg in ordered])


def select_support(B_hat: CoefficientMatrix, threshold: float) -> SupportSet:
    """rows whose Euclidean norm is strictly above the threshold"""
    norms = B_hat.row_norms()
    return SupportSet(tuple(np.flatnonzero(norms > threshold)), B_hat.p)


def oracle_threshold_grid(B_hat: CoefficientMatrix, size: int = ORACLE_GRID_SIZE) -> np.ndarray:
    """log spaced values from half the smallest positive row norm to the largest row norm"""
    norms = B_hat.row_norms()
    positive = norms[norms > 0]
    if not positive.size:
        return np.zeros(1)
    return np.geomspace(positive.min() / 2.0, positive.max(), size)


def tune_threshold(B_hat: CoefficientMatrix, grid: Sequence[float], truth: SupportSet) -> float:
    """grid value with the smallest Hamming distance to truth, the smallest value on ties"""
    best, best_err = None, None
    for value in sorted(grid):
        err = hamming(select_support(B_hat, value), truth)
        if best_err is None or err < best_err:
            best, best_err = value, err
    logger.debug("tuned threshold %g, hamming %s", best, best_err)
    return float(best)


def master_threshold(
    messages: Sequence[DebiasedMessage],
    rule: ThresholdRule,
    tuning_oracle: Optional[SupportSet] = None,
) -> SupportBroadcast:
    """group hard thresholding of the stacked debiased estimates"""
    B_hat = stack_messages(messages)
    if rule.kind == ThresholdRule.FIXED:
        threshold = rule.value
    elif rule.kind == ThresholdRule.ORACLE_TUNED:
        if tuning_oracle is None:
            raise ProtocolError("oracle tuned threshold needs the true support")
        grid = rule.grid if rule.grid else oracle_threshold_grid(B_hat)
        threshold = tune_threshold(B_hat, grid, tuning_oracle)
    else:
        threshold = theoretical_threshold(**rule.params)
    return SupportBroadcast(select_support(B_hat, threshold), threshold)


def theoretical_threshold(K, sigma, sigma_X, lambda_min, lambda_max, s, m, n, p, C) -> float:
    """half of the minimal signal strength guaranteeing support recovery::

        2 L = 6 K sigma sqrt((m + log p) / n)
              + C sigma_X^4 lambda_max^(1/2) sigma s sqrt(m) log p / (lambda_min^(3/2) n)
    """
    for name, value in (
        ("K", K), ("sigma", sigma), ("sigma_X", sigma_X), ("lambda_min", lambda_min),
        ("lambda_max", lambda_max), ("s", s), ("m", m), ("n", n), ("p", p),
    ):
        if not value > 0:
            raise ProblemError("%s must be positive, got %s" % (name, value))
    if C < 0:
        raise ProblemError("C must be non-negative, got %s" % C)
    log_p = math.log(p)
    first = 6.0 * K * sigma * math.sqrt((m + log_p) / n)
    second = C * sigma_X ** 4 * math.sqrt(lambda_max) * sigma * s * math.sqrt(m) * log_p / (lambda_min ** 1.5 * n)
    return (first + second) / 2.0


def theoretical_params(Sigma: np.ndarray, sigma: float, s: int, m: int, n: int, C: float, sigma_X: float = 1.0) -> dict:
    """constants of :func:`theoretical_threshold` from a population covariance"""
    Sigma = np.asarray(Sigma, dtype=float)
    eig = np.linalg.eigvalsh(Sigma)
    return dict(
        K=float(np.max(np.diag(np.linalg.inv(Sigma)))),
        sigma=sigma,
        sigma_X=sigma_X,
        lambda_min=float(eig[0]),
        lambda_max=float(eig[-1]),
        s=s,
        m=m,
        n=n,
        p=Sigma.shape[0],
        C=C,
    )


# --- orchestration ---
def _finish(dispatcher: Dispatcher, messages: List[DebiasedMessage], rule, truth) -> DsmlResult:
    broadcast = master_threshold(messages, rule, truth)
    dispatcher.broadcast(broadcast)
    columns = [worker_finalize(msg, dispatcher.receive(msg.task_id)) for msg in messages]
    return DsmlResult(
        CoefficientMatrix.from_columns(columns),
        broadcast.support,
        dispatcher.stats,
        broadcast.lambda_threshold,
        messages,
    )


def _attributed(worker, func, *args, **kwargs):
    try:
        with run_context(task=worker):
            return func(*args, **kwargs)
    except DsmlError as e:
        raise WorkerError(str(e), worker) from e


def run_dsml(
    tasks: List[TaskData],
    opts: SolverOptions,
    mu: float,
    rule: ThresholdRule,
    tuning_oracle: Optional[SupportSet] = None,
    cache: Optional[MCache] = None,
    thread_workers: Optional[int] = None,
    sequential: bool = False,
) -> DsmlResult:
    """run the whole protocol, workers concurrently on a thread pool.

    with `sequential` the three steps are composed in process one task
    after the other, the result is identical.
    """
    n, p, m = validate_problem(tasks)
    dispatcher = Dispatcher(m, p, thread_workers=thread_workers)

    if sequential:
        for t, task in enumerate(tasks):
            dispatcher.send_upstream(_attributed(t, worker_step, task, opts, mu, task_id=t, cache=cache))
        return _finish(dispatcher, dispatcher.collected(), rule, tuning_oracle)

    async def work(t, task):
        msg = await dispatcher.run_in_thread(_attributed, t, worker_step, task, opts, mu, task_id=t, cache=cache)
        dispatcher.send_upstream(msg)

    async def main():
        workers = [dispatcher.schedule_task(work(t, task), name="worker-%d" % t) for t, task in enumerate(tasks)]
        # barrier, the first failure aborts the run
        done = await asyncio.gather(*workers, return_exceptions=True)
        for outcome in done:
            if isinstance(outcome, BaseException):
                raise outcome
        return _finish(dispatcher, dispatcher.collected(), rule, tuning_oracle)

    result = dispatcher.run(main())
    logger.debug(
        "dsml run: m=%d p=%d support=%d upstream=%d downstream=%d",
        m, p, len(result.support), result.stats.upstream_scalars, result.stats.downstream_scalars,
    )
    return result
