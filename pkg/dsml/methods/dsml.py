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
"""the one round debiased protocol"""
from ..metrics import hamming
from ..protocol import ThresholdRule, run_dsml
from ..solvers import default_lambda
from .base import MethodResult, lambda_path

method_name = "dsml"


def fit(problem, tuning):
    truth = problem.support if tuning.threshold.kind == ThresholdRule.ORACLE_TUNED else None
    if tuning.dsml_lambda == "path" and tuning.oracle:
        lambdas = lambda_path(problem, tuning)
    else:
        lambdas = [default_lambda(problem.sigma, problem.n, problem.p)]

    best, best_lam, best_err = None, None, None
    for lam in lambdas:
        result = run_dsml(
            problem.tasks, tuning.solver.with_lambda(lam), tuning.mu, tuning.threshold, truth,
            cache=tuning.cache, thread_workers=tuning.thread_workers,
        )
        err = hamming(result.support, problem.support)
        if best_err is None or err < best_err:
            best, best_lam, best_err = result, lam, err
    return MethodResult(best.B, best.stats, float(best_lam), best.threshold)
