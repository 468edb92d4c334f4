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
"""centralized comparison: debias the group lasso columns, then group hard thresholding"""
from ..core import CoefficientMatrix, Family
from ..debias import (
    compute_logistic_weights,
    compute_M_logistic,
    debias_linear,
    debias_logistic,
    surrogate_for_task,
)
from ..message import DebiasedMessage
from ..protocol import ThresholdRule, master_threshold, worker_finalize
from .base import MethodResult, centralized_comm
from .group_lasso import tuned_group_lasso

method_name = "debiased_group_lasso"


def fit(problem, tuning):
    B, lam = tuned_group_lasso(problem, tuning)
    messages = []
    for t, task in enumerate(problem.tasks):
        beta = B.column(t)
        if task.family == Family.LINEAR:
            M = surrogate_for_task(task.X, tuning.mu, tuning.cache)
            beta_u = debias_linear(task.X, task.y, beta, M)
        else:
            M = compute_M_logistic(task.X, compute_logistic_weights(task.X, beta), tuning.mu)
            beta_u = debias_logistic(task.X, task.y, beta, M)
        messages.append(DebiasedMessage(t, beta_u))
    truth = problem.support if tuning.threshold.kind == ThresholdRule.ORACLE_TUNED else None
    broadcast = master_threshold(messages, tuning.threshold, truth)
    columns = [worker_finalize(msg, broadcast) for msg in messages]
    B_tilde = CoefficientMatrix.from_columns(columns)
    return MethodResult(B_tilde, centralized_comm(problem), lam, broadcast.lambda_threshold)
