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
"""Shared domain types and linear algebra primitives.

All types are immutable after construction, arrays are stored read-only so
that they can be shared between concurrent workers.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .errors import DsmlWarning, ProblemError, SingularSupportError

logger = logging.getLogger(__name__)

# restricted Gram matrices with a larger condition number are rejected
MAX_CONDITION = 1e12
# accepted range of a column's empirical second moment
MOMENT_RANGE = (0.1, 10.0)


def _frozen(arr, dtype=float):
    arr = np.array(arr, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class Family(object):
    """response families

        * LINEAR = 'linear'
        * LOGISTIC = 'logistic'
    """

    LINEAR = "linear"
    LOGISTIC = "logistic"

    all = (LINEAR, LOGISTIC)


@dataclass(frozen=True, eq=False)
class TaskData:
    """Data held by one worker.

    :param X: n x p design, rows are samples
    :param y: length n response, values in {-1, +1} for the logistic family
    :param family: :class:`Family` of the response
    :param sigma: noise level, known in simulation
    """

    X: np.ndarray
    y: np.ndarray
    family: str = Family.LINEAR
    sigma: float = 1.0

    def __post_init__(self):
        X = _frozen(self.X)
        y = _frozen(self.y)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ProblemError("X must be a non-empty 2d matrix, got shape %s" % (X.shape,))
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ProblemError("y must have length %d, got shape %s" % (X.shape[0], y.shape))
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ProblemError("X and y must not contain NaN/Inf")
        if self.family not in Family.all:
            raise ProblemError("unknown family %r" % self.family)
        if self.family == Family.LOGISTIC and not np.all(np.abs(y) == 1.0):
            raise ProblemError("logistic responses must be in {-1, +1}")
        if not self.sigma > 0:
            raise ProblemError("sigma must be positive, got %s" % self.sigma)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """p x m coefficient matrix, column t belongs to task t, row j is the group of variable j."""

    entries: np.ndarray

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2:
            raise ProblemError("coefficient matrix must be 2d, got shape %s" % (entries.shape,))
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_columns(cls, columns: Sequence[np.ndarray]) -> "CoefficientMatrix":
        if not columns:
            raise ProblemError("no columns")
        return cls(np.column_stack([np.asarray(c, dtype=float) for c in columns]))

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    def column(self, t: int) -> np.ndarray:
        return self.entries[:, t]

    def row_norms(self) -> np.ndarray:
        """Euclidean norm of every row"""
        return np.linalg.norm(self.entries, axis=1)


@dataclass(frozen=True)
class SupportSet:
    """Strictly increasing variable indices, optionally bounded by p."""

    indices: Tuple[int, ...] = ()
    p: Optional[int] = None

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        for a, b in zip(indices, indices[1:]):
            if b <= a:
                raise ProblemError("support indices must be strictly increasing: %s" % (indices,))
        if indices and indices[0] < 0:
            raise ProblemError("support index must be non-negative: %s" % indices[0])
        if self.p is not None and indices and indices[-1] >= self.p:
            raise ProblemError("support index %s out of range for p=%s" % (indices[-1], self.p))
        object.__setattr__(self, "indices", indices)

    @classmethod
    def of(cls, indices: Iterable[int], p: Optional[int] = None) -> "SupportSet":
        """build from any iterable, sorting and removing duplicates"""
        return cls(tuple(sorted(set(int(i) for i in indices))), p)

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "SupportSet":
        v = np.asarray(v)
        return cls(tuple(np.flatnonzero(v != 0)), v.shape[0])

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j):
        return j in self.indices

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int)

    def mask(self, p: Optional[int] = None) -> np.ndarray:
        """boolean indicator vector of length p"""
        p = p if p is not None else self.p
        if p is None:
            raise ProblemError("support has no dimension, pass p")
        out = np.zeros(p, dtype=bool)
        out[list(self.indices)] = True
        return out


@dataclass(frozen=True)
class SolverOptions:
    """Solver settings.

    :param max_iter: maximal number of sweeps/iterations
    :param tol: convergence tolerance on the parameter change
    :param lam: regularization level lambda, None means the default rule
    """

    max_iter: int = 10000
    tol: float = 1e-8
    lam: Optional[float] = None

    def __post_init__(self):
        if int(self.max_iter) < 1:
            raise ProblemError("max_iter must be >= 1, got %s" % self.max_iter)
        if not self.tol > 0:
            raise ProblemError("tol must be positive, got %s" % self.tol)
        if self.lam is not None and self.lam < 0:
            raise ProblemError("lambda must be non-negative, got %s" % self.lam)

    def with_lambda(self, lam: float) -> "SolverOptions":
        return SolverOptions(max_iter=self.max_iter, tol=self.tol, lam=lam)


def validate_problem(tasks: List[TaskData]) -> Tuple[int, int, int]:
    """check the tasks form one homogeneous problem, return (n, p, m)."""
    if not tasks:
        raise ProblemError("no tasks")
    first = tasks[0]
    for t, task in enumerate(tasks):
        if task.X.shape != first.X.shape:
            raise ProblemError("dimension mismatch at task %d" % t, task_index=t)
        if task.family != first.family:
            raise ProblemError("mixed families at task %d" % t, task_index=t)
        moments = np.mean(task.X ** 2, axis=0)
        low, high = MOMENT_RANGE
        if np.any(moments < low) or np.any(moments > high):
            msg = "task %d has columns with second moment outside [%s, %s]" % (t, low, high)
            logger.warning(msg)
            warnings.warn(msg, DsmlWarning)
    return first.n, first.p, len(tasks)


def gram(X: np.ndarray) -> np.ndarray:
    """X^T X / n, symmetrized."""
    X = np.asarray(X, dtype=float)
    G = X.T @ X / X.shape[0]
    return (G + G.T) / 2.0


def ols_on_support(X: np.ndarray, y: np.ndarray, support: SupportSet) -> np.ndarray:
    """least squares restricted to the columns in `support`, zero elsewhere."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    beta = np.zeros(p)
    if not len(support):
        return beta
    idx = support.as_array()
    if idx[-1] >= p:
        raise ProblemError("support index %s out of range for p=%s" % (idx[-1], p))
    if len(idx) > n:
        raise SingularSupportError("support size %d exceeds n=%d" % (len(idx), n), np.inf)
    XS = X[:, idx]
    G = XS.T @ XS
    condition = np.linalg.cond(G)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularSupportError(
            "restricted Gram is singular, condition %.3e" % condition, condition
        )
    beta[idx] = linalg.solve(G, XS.T @ y, assume_a="pos")
    return beta
