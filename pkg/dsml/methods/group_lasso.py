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
"""centralized group lasso, all data on one machine"""
import logging

from ..solvers import default_group_lambda, group_lasso_path, solve_group_lasso
from .base import MethodResult, centralized_comm, lambda_path, pick_by_hamming

method_name = "group_lasso"

logger = logging.getLogger(__name__)


def tuned_group_lasso(problem, tuning):
    """(B, lambda) of the tuned group lasso, computed once per problem"""
    found = problem.scratch.get(method_name)
    if found is not None:
        return found
    if tuning.oracle:
        lambdas = lambda_path(problem, tuning, grouped=True)
        fits = group_lasso_path(problem.tasks, lambdas, tuning.solver)
        best = pick_by_hamming([fit.B.entries for fit in fits], problem.support)
        found = (fits[best].B, float(lambdas[best]))
    else:
        lam = default_group_lambda(problem.sigma, problem.n, problem.p, problem.m)
        found = (solve_group_lasso(problem.tasks, tuning.solver.with_lambda(lam)).B, lam)
    logger.debug("group lasso lambda=%g", found[1])
    problem.scratch[method_name] = found
    return found


def fit(problem, tuning):
    B, lam = tuned_group_lasso(problem, tuning)
    return MethodResult(B, centralized_comm(problem), lam)
