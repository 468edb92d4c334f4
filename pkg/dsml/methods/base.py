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
"""types shared by the estimation methods"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..core import CoefficientMatrix, Family, SolverOptions, SupportSet, TaskData
from ..debias import MCache
from ..message import CommStats
from ..metrics import hamming, row_support
from ..protocol import ThresholdRule
from ..solvers import lambda_max_group_lasso, lambda_max_lasso, lambda_max_logistic


@dataclass
class Problem:
    """one generated multi-task problem

    :param tasks: the workers' data
    :param B_star: true coefficients
    :param support: true shared support, used only for oracle tuning and evaluation
    :param Sigma: population covariance of every design
    :param scratch: per problem storage shared by the methods, e.g. a group lasso path
    """

    tasks: List[TaskData]
    B_star: CoefficientMatrix
    support: SupportSet
    Sigma: np.ndarray
    scratch: Dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.tasks[0].n

    @property
    def p(self) -> int:
        return self.tasks[0].p

    @property
    def m(self) -> int:
        return len(self.tasks)

    @property
    def family(self) -> str:
        return self.tasks[0].family

    @property
    def sigma(self) -> float:
        return self.tasks[0].sigma


@dataclass
class Tuning:
    """how methods choose their parameters

    :param oracle: tune lambda on the true support (minimal Hamming distance)
    :param path_size: length of the lambda path
    :param path_ratio: smallest lambda of the path relative to the largest
    :param mu: constraint level of the inverse surrogate
    :param threshold: group threshold rule
    :param solver: solver options, lam is ignored
    :param dsml_lambda: "default" for 4 sigma sqrt(log p / n), "path" to tune on the lambda path
    :param cache: shared inverse surrogate cache
    :param thread_workers: size of the protocol worker thread pool
    """

    oracle: bool = True
    path_size: int = 20
    path_ratio: float = 0.01
    mu: float = 0.1
    threshold: ThresholdRule = field(default_factory=ThresholdRule)
    solver: SolverOptions = field(default_factory=SolverOptions)
    dsml_lambda: str = "default"
    cache: Optional[MCache] = None
    thread_workers: Optional[int] = None


@dataclass
class MethodResult:
    """estimate of one method with its communication cost and chosen parameters"""

    B: CoefficientMatrix
    comm: CommStats = field(default_factory=CommStats)
    lam: float = float("nan")
    threshold: float = float("nan")


def lambda_path(problem: Problem, tuning: Tuning, grouped: bool = False) -> np.ndarray:
    """decreasing log spaced lambdas from the null solution bound"""
    if grouped:
        top = lambda_max_group_lasso(problem.tasks)
    elif problem.family == Family.LINEAR:
        top = max(lambda_max_lasso(task.X, task.y) for task in problem.tasks)
    else:
        top = max(lambda_max_logistic(task.X, task.y) for task in problem.tasks)
    top = max(top, np.finfo(float).tiny)
    return np.geomspace(top, top * tuning.path_ratio, tuning.path_size)


def pick_by_hamming(candidates, truth: SupportSet):
    """index of the estimate with the smallest row support Hamming distance, the first on ties"""
    best, best_err = 0, None
    for i, B in enumerate(candidates):
        err = hamming(row_support(B), truth)
        if best_err is None or err < best_err:
            best, best_err = i, err
    return best


def centralized_comm(problem: Problem) -> CommStats:
    """all data shipped to one machine, coefficients shipped back"""
    return CommStats(
        upstream_scalars=problem.m * problem.n * (problem.p + 1),
        downstream_scalars=problem.m * problem.p,
        rounds=1,
    )
