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
"""Evaluation metrics for support recovery, estimation and prediction."""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .core import CoefficientMatrix, SupportSet, TaskData
from .errors import ProblemError


@dataclass(frozen=True)
class RunMetrics:
    """metrics of one fitted coefficient matrix against the truth

    :param hamming: Hamming distance of the row support
    :param est_error_l1l2: sum of row-wise Euclidean errors
    :param pred_error: population excess risk
    :param per_task_pred: excess risk of every task
    :param pred_error_in_sample: in-sample variant, (1/(nm)) sum ||X_t D_t||^2
    :param mean_task_hamming: Hamming distance averaged over the per-task supports
    """

    hamming: int
    est_error_l1l2: float
    pred_error: float
    per_task_pred: Tuple[float, ...]
    pred_error_in_sample: float = 0.0
    mean_task_hamming: float = 0.0


def _entries(B):
    return B.entries if isinstance(B, CoefficientMatrix) else np.asarray(B, dtype=float)


def hamming(S_hat: SupportSet, S: SupportSet) -> int:
    """size of the symmetric difference"""
    if S_hat.p is not None and S.p is not None and S_hat.p != S.p:
        raise ProblemError("supports over different dimensions: %s vs %s" % (S_hat.p, S.p))
    return len(set(S_hat.indices) ^ set(S.indices))


def estimation_error(B_tilde, B_star) -> float:
    """sum_j ||B~_j - B*_j||_2"""
    A, B = _entries(B_tilde), _entries(B_star)
    if A.shape != B.shape:
        raise ProblemError("shape mismatch: %s vs %s" % (A.shape, B.shape))
    return float(np.linalg.norm(A - B, axis=1).sum())


def per_task_prediction_errors(B_tilde, B_star, Sigmas: Sequence[np.ndarray]) -> np.ndarray:
    A, B = _entries(B_tilde), _entries(B_star)
    if A.shape != B.shape or len(Sigmas) != A.shape[1]:
        raise ProblemError("shape mismatch: %s vs %s with %d covariances" % (A.shape, B.shape, len(Sigmas)))
    D = A - B
    return np.array([D[:, t] @ np.asarray(Sigmas[t]) @ D[:, t] for t in range(D.shape[1])])


def prediction_error(B_tilde, B_star, Sigmas: Sequence[np.ndarray], n=None, m=None) -> float:
    """population excess risk (1/m) sum_t D_t^T Sigma_t D_t

    n and m are accepted for symmetry with the in-sample variant, m is checked.
    """
    errors = per_task_prediction_errors(B_tilde, B_star, Sigmas)
    if m is not None and m != len(errors):
        raise ProblemError("m=%s but %d tasks given" % (m, len(errors)))
    return float(errors.mean())


def prediction_error_in_sample(B_tilde, B_star, tasks: Sequence[TaskData]) -> float:
    """(1/(nm)) sum_t ||X_t (b~_t - b*_t)||^2"""
    A, B = _entries(B_tilde), _entries(B_star)
    if A.shape != B.shape or len(tasks) != A.shape[1]:
        raise ProblemError("shape mismatch: %s vs %s with %d tasks" % (A.shape, B.shape, len(tasks)))
    D = A - B
    total = sum(float(np.sum((task.X @ D[:, t]) ** 2)) for t, task in enumerate(tasks))
    return total / (tasks[0].n * len(tasks))


def row_support(B) -> SupportSet:
    """rows with any non zero entry"""
    A = _entries(B)
    return SupportSet(tuple(np.flatnonzero(np.any(A != 0, axis=1))), A.shape[0])


def evaluate(B_tilde, B_star, S: SupportSet, Sigmas: Sequence[np.ndarray], tasks: Sequence[TaskData]) -> RunMetrics:
    """all metrics of one estimate"""
    A = _entries(B_tilde)
    per_task = per_task_prediction_errors(A, B_star, Sigmas)
    task_hamming = [hamming(SupportSet.from_vector(A[:, t]), S) for t in range(A.shape[1])]
    return RunMetrics(
        hamming=hamming(row_support(A), S),
        est_error_l1l2=estimation_error(A, B_star),
        pred_error=float(per_task.mean()),
        per_task_pred=tuple(float(v) for v in per_task),
        pred_error_in_sample=prediction_error_in_sample(A, B_star, tasks),
        mean_task_hamming=float(np.mean(task_hamming)),
    )
