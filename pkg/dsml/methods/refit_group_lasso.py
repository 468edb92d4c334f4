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
"""group lasso support, refitted without penalty on every task"""
from ..core import CoefficientMatrix, Family, ols_on_support
from ..metrics import row_support
from ..solvers import logistic_on_support
from .base import MethodResult, centralized_comm
from .group_lasso import tuned_group_lasso

method_name = "refit_group_lasso"


def fit(problem, tuning):
    B, lam = tuned_group_lasso(problem, tuning)
    support = row_support(B)
    columns = []
    for task in problem.tasks:
        if task.family == Family.LINEAR:
            columns.append(ols_on_support(task.X, task.y, support))
        else:
            columns.append(logistic_on_support(task.X, task.y, support, tuning.solver).beta)
    return MethodResult(CoefficientMatrix.from_columns(columns), centralized_comm(problem), lam)
