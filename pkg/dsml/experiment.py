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
"""Simulation experiments.

An experiment sweeps one problem parameter (``n`` with ``m`` fixed, or ``m``
with ``n`` fixed), draws ``replications`` problems per sweep point and fits
every configured method on each of them. Every (sweep point, replication,
method) gives one :class:`ResultRow`; rows are written as CSV with the fixed
column order :data:`COLUMNS`.

The data of a replication only depends on the base seed, the sweep index and
the replication number, see :func:`derive_seed`.
"""
import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .core import Family, SolverOptions
from .datagen import GenSpec, ar_covariance, generate
from .debias import MCache
from .errors import ConfigError, DataFormatError, DsmlError
from .log import run_context
from .methods import MethodManager
from .methods.base import Problem, Tuning
from .metrics import evaluate
from .options import dump_yaml, section
from .protocol import ThresholdRule, theoretical_params

logger = logging.getLogger(__name__)

MU_RULE = "sqrt(log p / n)"
SWEEP_PARAMS = ("n", "m")
DSML_LAMBDA_RULES = ("default", "path")

COLUMNS = (
    "method",
    "sweep_value",
    "replication",
    "hamming",
    "est_error",
    "pred_error",
    "pred_error_in_sample",
    "mean_task_hamming",
    "wall_time_ms",
    "comm_upstream",
    "comm_downstream",
    "lambda",
    "threshold",
    "error",
)
METRIC_COLUMNS = (
    "hamming",
    "est_error",
    "pred_error",
    "pred_error_in_sample",
    "mean_task_hamming",
    "wall_time_ms",
    "comm_upstream",
    "comm_downstream",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """a validated experiment

    :param spec: base problem, ``n``/``m`` and ``seed`` are replaced per replication
    :param sweep_param: ``n`` or ``m``
    :param sweep_values: the grid of the swept parameter
    :param methods: expanded method names
    :param replications: problems drawn per sweep point
    :param mu_rule: ``"sqrt(log p / n)"`` or a fixed float
    :param threshold: threshold rule settings, ``kind`` plus ``value``/``grid``/``C``/``sigma_X``
    :param oracle: tune lambdas on the true support
    :param dsml_lambda: ``default`` or ``path``
    :param seed: base seed
    :param output: CSV path, nothing is written when empty
    :param record_wall_time: fill the wall_time_ms column, makes the output non reproducible
    :param max_failure_rate: share of failed rows tolerated before the run counts as failed
    """

    spec: GenSpec
    sweep_param: str
    sweep_values: Tuple[int, ...]
    methods: Tuple[str, ...]
    replications: int = 200
    mu_rule: Union[str, float] = MU_RULE
    threshold: Dict[str, Any] = field(default_factory=lambda: {"kind": ThresholdRule.ORACLE_TUNED})
    oracle: bool = True
    path_size: int = 20
    path_ratio: float = 0.01
    dsml_lambda: str = "default"
    solver: SolverOptions = field(default_factory=SolverOptions)
    seed: int = 0
    output: Optional[str] = None
    record_wall_time: bool = False
    max_failure_rate: float = 0.1
    method_paths: Tuple[str, ...] = ()
    thread_workers: Optional[int] = None
    name: str = "experiment"

    def __post_init__(self):
        if self.sweep_param not in SWEEP_PARAMS:
            raise ConfigError("sweep param must be one of %s, got %r" % (SWEEP_PARAMS, self.sweep_param))
        if not self.sweep_values:
            raise ConfigError("empty sweep grid")
        for value in self.sweep_values:
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError("sweep values must be positive integers, got %r" % (value,))
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("replications must be >= 1, got %r" % (self.replications,))
        if not self.methods:
            raise ConfigError("no methods configured")
        if isinstance(self.mu_rule, str):
            if self.mu_rule != MU_RULE:
                raise ConfigError("unknown mu rule %r" % self.mu_rule)
        elif not self.mu_rule > 0:
            raise ConfigError("mu must be positive, got %r" % (self.mu_rule,))
        if self.dsml_lambda not in DSML_LAMBDA_RULES:
            raise ConfigError("dsml_lambda must be one of %s, got %r" % (DSML_LAMBDA_RULES, self.dsml_lambda))
        if not 0.0 <= self.max_failure_rate <= 1.0:
            raise ConfigError("max_failure_rate must be in [0, 1], got %r" % (self.max_failure_rate,))
        kind = self.threshold.get("kind")
        if kind not in (ThresholdRule.FIXED, ThresholdRule.ORACLE_TUNED, ThresholdRule.THEORETICAL):
            raise ConfigError("unknown threshold kind %r" % (kind,))
        if kind == ThresholdRule.FIXED and "value" not in self.threshold:
            raise ConfigError("fixed threshold needs a value")

    @classmethod
    def from_options(
        cls, options: Dict, seed: Optional[int] = None, output: Optional[str] = None
    ) -> "ExperimentConfig":
        """build from the merged yaml options, see docs/config.rst for the layout"""
        exp = section(options, "experiment")
        gen = section(options, "gen")
        tuning = section(options, "tuning")
        sweep = exp.get("sweep") or {}
        if not isinstance(sweep, dict):
            raise ConfigError("experiment.sweep must be a mapping")
        param = sweep.get("param")
        fixed = exp.get("fixed") or {}

        manager = MethodManager(exp.get("method_paths") or (), section(options, "method_groups"))
        methods = manager.load_methods(exp.get("methods") or [])

        try:
            spec = GenSpec(family=exp.get("family", Family.LINEAR), **gen, **fixed)
            solver = SolverOptions(**section(tuning, "solver"))
            return cls(
                spec=spec,
                sweep_param=param,
                sweep_values=tuple(sweep.get("values") or ()),
                methods=tuple(methods),
                replications=exp.get("replications", 200),
                mu_rule=tuning.get("mu", MU_RULE),
                threshold=dict(section(tuning, "threshold") or {"kind": ThresholdRule.ORACLE_TUNED}),
                oracle=bool(tuning.get("oracle", True)),
                path_size=int(tuning.get("path_size", 20)),
                path_ratio=float(tuning.get("path_ratio", 0.01)),
                dsml_lambda=tuning.get("dsml_lambda", "default"),
                solver=solver,
                seed=exp.get("seed", 0) if seed is None else seed,
                output=output or exp.get("output"),
                record_wall_time=bool(exp.get("record_wall_time", False)),
                max_failure_rate=float(exp.get("max_failure_rate", 0.1)),
                method_paths=tuple(manager.method_paths),
                thread_workers=section(options, "dispatcher").get("thread_workers"),
                name=exp.get("name", "experiment"),
            )
        except ConfigError:
            raise
        except (TypeError, DsmlError) as e:
            raise ConfigError("invalid option: %s" % e) from e

    def point_spec(self, sweep_index: int, replication: int) -> GenSpec:
        """the problem of one replication"""
        return self.spec.replace(
            **{self.sweep_param: int(self.sweep_values[sweep_index])},
            seed=derive_seed(self.seed, sweep_index, replication),
        )

    def mu_for(self, n: int, p: int) -> float:
        if self.mu_rule == MU_RULE:
            return math.sqrt(math.log(p) / n)
        return float(self.mu_rule)

    def threshold_rule(self, spec: GenSpec, Sigma: np.ndarray) -> ThresholdRule:
        kind = self.threshold["kind"]
        if kind == ThresholdRule.FIXED:
            return ThresholdRule.fixed(float(self.threshold["value"]))
        if kind == ThresholdRule.ORACLE_TUNED:
            return ThresholdRule.oracle(self.threshold.get("grid") or ())
        params = theoretical_params(
            Sigma, spec.sigma, spec.s, spec.m, spec.n,
            C=float(self.threshold.get("C", 0.0)),
            sigma_X=float(self.threshold.get("sigma_X", 1.0)),
        )
        return ThresholdRule.theoretical(**params)

    def describe(self) -> Dict:
        """plain data view, written next to the results"""
        return {
            "name": self.name,
            "seed": int(self.seed),
            "replications": self.replications,
            "sweep": {"param": self.sweep_param, "values": [int(v) for v in self.sweep_values]},
            "methods": list(self.methods),
            "gen": asdict(self.spec),
            "tuning": {
                "oracle": self.oracle,
                "path_size": self.path_size,
                "path_ratio": self.path_ratio,
                "dsml_lambda": self.dsml_lambda,
                "mu": self.mu_rule,
                "threshold": dict(self.threshold),
                "solver": {"max_iter": self.solver.max_iter, "tol": self.solver.tol},
            },
            "columns": list(COLUMNS),
        }


@dataclass
class ResultRow:
    method: str
    sweep_value: int
    replication: int
    hamming: float = float("nan")
    est_error: float = float("nan")
    pred_error: float = float("nan")
    pred_error_in_sample: float = float("nan")
    mean_task_hamming: float = float("nan")
    wall_time_ms: float = 0.0
    comm_upstream: float = float("nan")
    comm_downstream: float = float("nan")
    lambda_: float = float("nan")
    threshold: float = float("nan")
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)

    @property
    def sort_key(self):
        return (self.sweep_value, self.replication, self.method)

    def as_record(self) -> Tuple:
        values = asdict(self)
        values["lambda"] = values.pop("lambda_")
        return tuple(values[c] for c in COLUMNS)


def derive_seed(base_seed: int, sweep_index: int, replication: int) -> int:
    """64 bit seed of one replication, a pure function of its arguments"""
    state = np.random.SeedSequence(int(base_seed), spawn_key=(int(sweep_index), int(replication))).generate_state(
        2, dtype=np.uint32
    )
    return int(state[0]) << 32 | int(state[1])


def _error_text(e: BaseException) -> str:
    return ("%s: %s" % (type(e).__name__, e)).replace("\n", " ")


def run_replication(config: ExperimentConfig, sweep_index: int, replication: int) -> List[ResultRow]:
    """fit every method on one generated problem"""
    value = int(config.sweep_values[sweep_index])
    with run_context(sweep=value, rep=replication):
        try:
            manager = MethodManager(config.method_paths)
            manager.load_methods(config.methods)
            spec = config.point_spec(sweep_index, replication)
            data = generate(spec)
            Sigma = ar_covariance(spec.p, spec.rho)
            problem = Problem(data.tasks, data.B_star, data.support, Sigma)
            tuning = Tuning(
                oracle=config.oracle,
                path_size=config.path_size,
                path_ratio=config.path_ratio,
                mu=config.mu_for(spec.n, spec.p),
                threshold=config.threshold_rule(spec, Sigma),
                solver=config.solver,
                dsml_lambda=config.dsml_lambda,
                cache=MCache(),
                thread_workers=config.thread_workers,
            )
        except Exception as e:
            logger.error("replication setup failed: %s", e, exc_info=True)
            return [ResultRow(name, value, replication, error=_error_text(e)) for name in config.methods]

        rows = []
        Sigmas = [Sigma] * spec.m
        for name in config.methods:
            with run_context(method=name):
                start = time.perf_counter()
                try:
                    result = manager.get(name).fit(problem, tuning)
                    metrics = evaluate(result.B, data.B_star, data.support, Sigmas, data.tasks)
                except Exception as e:
                    logger.error("method %s failed: %s", name, e, exc_info=True)
                    rows.append(ResultRow(name, value, replication, error=_error_text(e)))
                    continue
                elapsed = (time.perf_counter() - start) * 1000.0
            rows.append(
                ResultRow(
                    method=name,
                    sweep_value=value,
                    replication=replication,
                    hamming=metrics.hamming,
                    est_error=metrics.est_error_l1l2,
                    pred_error=metrics.pred_error,
                    pred_error_in_sample=metrics.pred_error_in_sample,
                    mean_task_hamming=metrics.mean_task_hamming,
                    wall_time_ms=elapsed if config.record_wall_time else 0.0,
                    comm_upstream=result.comm.upstream_scalars,
                    comm_downstream=result.comm.downstream_scalars,
                    lambda_=result.lam,
                    threshold=result.threshold,
                )
            )
        return rows


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> List[ResultRow]:
    """run all replications, sorted by (sweep_value, replication, method).

    with jobs > 1 replications run in a process pool. The rows are written to
    ``config.output`` when set, together with a ``.meta.yml`` description.
    """
    points = [(i, r) for i in range(len(config.sweep_values)) for r in range(config.replications)]
    logger.info(
        "experiment %s: %d sweep points x %d replications x %d methods, jobs=%d",
        config.name, len(config.sweep_values), config.replications, len(config.methods), jobs,
    )
    rows: List[ResultRow] = []
    if jobs <= 1:
        for i, r in points:
            rows.extend(run_replication(config, i, r))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {executor.submit(run_replication, config, i, r): (i, r) for i, r in points}
            for future in as_completed(futures):
                i, r = futures[future]
                try:
                    rows.extend(future.result())
                except Exception as e:
                    # the worker process itself died
                    logger.error("replication %d of sweep index %d lost: %s", r, i, e)
                    rows.extend(
                        ResultRow(name, int(config.sweep_values[i]), r, error=_error_text(e)) for name in config.methods
                    )
    rows.sort(key=lambda row: row.sort_key)

    failed = sum(row.failed for row in rows)
    if failed:
        logger.warning("%d of %d rows failed", failed, len(rows))
    if config.output:
        write_results(rows, config.output)
        dump_yaml(config.describe(), meta_path(config.output))
    return rows


def failure_rate(rows: Sequence[ResultRow]) -> float:
    if not rows:
        return 0.0
    return sum(row.failed for row in rows) / len(rows)


def meta_path(output: Union[str, Path]) -> Path:
    output = Path(output)
    return output.with_name(output.stem + ".meta.yml")


def results_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([row.as_record() for row in rows], columns=list(COLUMNS))


def write_results(rows: Sequence[ResultRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results_frame(rows).to_csv(path, index=False, na_rep="")
    logger.info("wrote %d rows to %s", len(rows), path)
    return path


def _bad_value_line(frame: pd.DataFrame, column: str) -> Optional[int]:
    raw = frame[column]
    bad = pd.to_numeric(raw, errors="coerce").isna() & raw.notna()
    if bad.any():
        # header is line 1
        return int(np.flatnonzero(bad.to_numpy())[0]) + 2
    return None


def read_results(csv_path: Union[str, Path]) -> pd.DataFrame:
    """load a result CSV, DataFormatError with the line number when malformed"""
    try:
        frame = pd.read_csv(csv_path, dtype={"method": str, "error": str}, keep_default_na=False, na_values=[""])
    except pd.errors.EmptyDataError:
        raise DataFormatError("empty result file %s" % csv_path, line=1) from None
    except pd.errors.ParserError as e:
        found = re.search(r"line (\d+)", str(e))
        line = int(found.group(1)) if found else None
        raise DataFormatError("malformed result file %s: %s" % (csv_path, e), line=line) from None

    missing = [c for c in ("method", "sweep_value") + METRIC_COLUMNS if c not in frame.columns]
    if missing:
        raise DataFormatError("missing columns %s" % ", ".join(missing), line=1)
    for column in ("sweep_value",) + METRIC_COLUMNS:
        line = _bad_value_line(frame, column)
        if line is not None:
            raise DataFormatError("non numeric %s" % column, line=line)
        frame[column] = pd.to_numeric(frame[column])
    if frame["method"].isna().any():
        raise DataFormatError("missing method", line=int(np.flatnonzero(frame["method"].isna().to_numpy())[0]) + 2)
    if "error" not in frame.columns:
        frame["error"] = np.nan
    return frame


def summarize(csv_path: Union[str, Path], output_path: Union[str, Path, None] = None) -> pd.DataFrame:
    """mean and sample standard deviation of every metric per (method, sweep_value).

    failed rows only count in ``failures``. A group with a single run has sd 0.
    """
    frame = read_results(csv_path)
    failed = frame["error"].fillna("").astype(str) != ""
    ok = frame[~failed]

    keys = ["method", "sweep_value"]
    counts = frame.groupby(keys).size().rename("rows")
    failures = failed.groupby([frame["method"], frame["sweep_value"]]).sum().rename("failures")
    grouped = ok.groupby(keys)[list(METRIC_COLUMNS)]
    means = grouped.mean().add_suffix("_mean")
    sds = grouped.std(ddof=1).fillna(0.0).add_suffix("_sd")

    out = pd.concat([counts, failures.astype(int)], axis=1).join(means).join(sds)
    ordered = ["rows", "failures"]
    for column in METRIC_COLUMNS:
        ordered += [column + "_mean", column + "_sd"]
    out = out[ordered].reset_index().sort_values(keys, kind="mergesort").reset_index(drop=True)
    if output_path is not None:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        out.to_csv(output_path, index=False, na_rep="")
        logger.info("summary of %d groups written to %s", len(out), output_path)
    return out
