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
"""local lasso, every worker on its own, no communication"""
import numpy as np

from ..core import CoefficientMatrix, Family
from ..message import CommStats
from ..solvers import default_lambda, lasso_path, logistic_lasso_path
from .base import MethodResult, lambda_path, pick_by_hamming

method_name = "lasso"


def _path(task, lambdas, opts):
    if task.family == Family.LINEAR:
        return lasso_path(task.X, task.y, lambdas, opts)
    return logistic_lasso_path(task.X, task.y, lambdas, opts)


def fit(problem, tuning):
    if tuning.oracle:
        lambdas = lambda_path(problem, tuning)
    else:
        lambdas = [default_lambda(problem.sigma, problem.n, problem.p)]
    paths = [_path(task, lambdas, tuning.solver) for task in problem.tasks]
    candidates = [np.column_stack([path[i].beta for path in paths]) for i in range(len(lambdas))]
    best = pick_by_hamming(candidates, problem.support) if tuning.oracle else 0
    return MethodResult(CoefficientMatrix(candidates[best]), CommStats(), float(lambdas[best]))
