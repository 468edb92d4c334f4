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
"""Synthetic multi-task data.

rows of every design are drawn from N(0, Sigma) with Sigma_ab = rho^|a-b|,
all tasks share one support of size s, the non zero coefficients are drawn
uniformly per task.

Random numbers come from numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=(task_id, purpose))``, so every task and
every purpose (support, coefficients, design, noise) has its own
reproducible stream and adding tasks never changes the existing ones.
"""
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, NamedTuple, Union

import numpy as np
from scipy import linalg
from scipy.special import expit

from .core import CoefficientMatrix, Family, SupportSet, TaskData
from .errors import DataFormatError, ProblemError

logger = logging.getLogger(__name__)

FORMAT_MAGIC = "# dsml dataset v1"
HEADER_FIELDS = ("p", "n", "m", "s", "family", "seed")

# stream purposes
SUPPORT, COEF, DESIGN, NOISE = range(4)

DESIGNS = ("gaussian", "rademacher")


@dataclass(frozen=True)
class GenSpec:
    """synthetic problem description

    :param p: number of variables
    :param n: samples per task
    :param m: number of tasks
    :param s: size of the shared support
    :param sigma: noise level, unused for the logistic family
    :param rho: base of the AR covariance
    :param coef_low: lower end of the uniform coefficient range
    :param coef_high: upper end of the uniform coefficient range
    :param family: linear or logistic
    :param seed: 64 bit seed
    :param design: gaussian, or rademacher for a non gaussian subgaussian design with the same covariance
    """

    p: int = 200
    n: int = 100
    m: int = 10
    s: int = 10
    sigma: float = 1.0
    rho: float = 0.5
    coef_low: float = 0.0
    coef_high: float = 1.0
    family: str = Family.LINEAR
    seed: int = 0
    design: str = "gaussian"

    def __post_init__(self):
        for name in ("p", "n", "m", "s"):
            if int(getattr(self, name)) < 1:
                raise ProblemError("%s must be a positive integer, got %s" % (name, getattr(self, name)))
        if self.s > self.p:
            raise ProblemError("s=%d exceeds p=%d" % (self.s, self.p))
        if not 0.0 <= self.rho < 1.0:
            raise ProblemError("rho must be in [0, 1), got %s" % self.rho)
        if self.family not in Family.all:
            raise ProblemError("unknown family %r" % self.family)
        if self.family == Family.LINEAR and not self.sigma > 0:
            raise ProblemError("sigma must be positive, got %s" % self.sigma)
        if self.coef_high < self.coef_low:
            raise ProblemError("empty coefficient range [%s, %s]" % (self.coef_low, self.coef_high))
        if self.design not in DESIGNS:
            raise ProblemError("unknown design %r" % self.design)
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ProblemError("seed must be a 64 bit unsigned integer, got %s" % self.seed)

    def replace(self, **changes) -> "GenSpec":
        values = asdict(self)
        values.update(changes)
        return GenSpec(**values)


class Dataset(NamedTuple):
    tasks: List[TaskData]
    B_star: CoefficientMatrix
    support: SupportSet


def rng_for(seed: int, task_id: int, purpose: int) -> np.random.Generator:
    """independent PCG64 stream for (seed, task, purpose)"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(task_id, purpose))))


def ar_covariance(p: int, rho: float) -> np.ndarray:
    """Sigma_ab = rho^|a-b|"""
    if not 0.0 <= rho < 1.0:
        raise ProblemError("rho must be in [0, 1), got %s" % rho)
    return linalg.toeplitz(rho ** np.arange(p, dtype=float))


def generate(spec: GenSpec) -> Dataset:
    """draw the tasks, the true coefficients and the shared support"""
    Sigma = ar_covariance(spec.p, spec.rho)
    L = linalg.cholesky(Sigma, lower=True)

    support = SupportSet.of(rng_for(spec.seed, 0, SUPPORT).choice(spec.p, size=spec.s, replace=False), spec.p)
    idx = support.as_array()

    tasks, columns = [], []
    for t in range(spec.m):
        beta = np.zeros(spec.p)
        beta[idx] = rng_for(spec.seed, t, COEF).uniform(spec.coef_low, spec.coef_high, size=spec.s)
        design_rng = rng_for(spec.seed, t, DESIGN)
        if spec.design == "gaussian":
            Z = design_rng.standard_normal((spec.n, spec.p))
        else:
            Z = design_rng.choice(np.array([-1.0, 1.0]), size=(spec.n, spec.p))
        X = Z @ L.T
        eta = X @ beta
        noise_rng = rng_for(spec.seed, t, NOISE)
        if spec.family == Family.LINEAR:
            y = eta + spec.sigma * noise_rng.standard_normal(spec.n)
            sigma = spec.sigma
        else:
            # P(y = +1 | x) = 1 / (1 + exp(-x beta))
            y = np.where(noise_rng.uniform(size=spec.n) < expit(eta), 1.0, -1.0)
            sigma = spec.sigma if spec.sigma > 0 else 1.0
        tasks.append(TaskData(X, y, spec.family, sigma))
        columns.append(beta)
    logger.debug("generated %d tasks, p=%d n=%d s=%d seed=%d", spec.m, spec.p, spec.n, spec.s, spec.seed)
    return Dataset(tasks, CoefficientMatrix.from_columns(columns), support)


# --- fixture format ---
def _fmt(values) -> str:
    return ",".join("%.17g" % v for v in values)


def save_dataset(path: Union[str, Path], spec: GenSpec, data: Dataset) -> Path:
    """write the columnar text format::

        # dsml dataset v1
        p,n,m,s,family,seed
        <values>
        support,<i>,...
        task,<t>,<sigma>
        beta,<p values>
        <y>,<x_1>,...,<x_p>     (n lines)
        ... one block per task
    """
    path = Path(path)
    lines = [FORMAT_MAGIC, ",".join(HEADER_FIELDS)]
    lines.append(",".join(str(getattr(spec, name)) for name in HEADER_FIELDS))
    lines.append(",".join(["support"] + [str(i) for i in data.support]))
    for t, task in enumerate(data.tasks):
        lines.append("task,%d,%s" % (t, "%.17g" % task.sigma))
        lines.append("beta," + _fmt(data.B_star.column(t)))
        for k in range(task.n):
            lines.append(_fmt(np.concatenate(([task.y[k]], task.X[k]))))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_dataset(path: Union[str, Path]):
    """read a file written by :func:`save_dataset`, return (header dict, :class:`Dataset`)"""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(lines):
            raise DataFormatError("unexpected end of file", pos + 1)
        pos += 1
        return lines[pos - 1].split(",")

    def floats(fields, count):
        if len(fields) != count:
            raise DataFormatError("expected %d values, got %d" % (count, len(fields)), pos)
        try:
            return np.array([float(v) for v in fields])
        except ValueError as e:
            raise DataFormatError(str(e), pos) from None

    if not lines or lines[0] != FORMAT_MAGIC:
        raise DataFormatError("not a dsml dataset", 1)
    pos = 1
    if take() != list(HEADER_FIELDS):
        raise DataFormatError("bad header", pos)
    values = take()
    if len(values) != len(HEADER_FIELDS):
        raise DataFormatError("bad header values", pos)
    header = dict(zip(HEADER_FIELDS, values))
    try:
        p, n, m, s = (int(header[k]) for k in ("p", "n", "m", "s"))
        header.update(p=p, n=n, m=m, s=s, seed=int(header["seed"]))
    except ValueError as e:
        raise DataFormatError(str(e), pos) from None

    fields = take()
    if fields[0] != "support":
        raise DataFormatError("expected support line", pos)
    support = SupportSet.of((int(v) for v in fields[1:]), p)

    tasks, columns = [], []
    for t in range(m):
        fields = take()
        if fields[0] != "task" or len(fields) != 3 or int(fields[1]) != t:
            raise DataFormatError("expected block of task %d" % t, pos)
        sigma = float(fields[2])
        fields = take()
        if fields[0] != "beta":
            raise DataFormatError("expected beta line", pos)
        columns.append(floats(fields[1:], p))
        rows = np.vstack([floats(take(), p + 1) for _ in range(n)])
        try:
            tasks.append(TaskData(rows[:, 1:], rows[:, 0], header["family"], sigma))
        except ProblemError as e:
            raise DataFormatError(str(e), pos) from None
    return header, Dataset(tasks, CoefficientMatrix.from_columns(columns), support)
