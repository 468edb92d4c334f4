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
import asyncio
import logging
import sys
from pathlib import Path

import click
import uvloop

from .datagen import GenSpec, generate, save_dataset
from .env import Env
from .errors import ConfigError, DataFormatError, ProblemError
from .experiment import ExperimentConfig, failure_rate, run_experiment, summarize
from .log import setup_logging
from .options import load_configs, section

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_FAILURES = 2


def _fail(msg, code=EXIT_CONFIG):
    click.echo(msg, err=True)
    sys.exit(code)


def _install_logging(env):
    try:
        setup_logging(env.options.get("log_config"), env.work_dir, env.verbose)
    except (ValueError, TypeError, AttributeError, ImportError) as e:
        raise ConfigError("invalid log_config: %s" % e) from e


@click.group()
@click.option("-v", "--verbose", count=True, help="Count output level, can set multipule times.")
@click.option("-w", "--work-dir", default=".", show_default=True, help="Directory for the log files.")
def main(verbose=0, work_dir="."):
    """Console script for dsml

    Copyright (C) 2017-present qytz <hhhhhf@foxmail.com>

    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        http://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
    """
    env = Env()
    env.reset()
    env.verbose = verbose
    env.set_work_dir(work_dir)


@main.command()
@click.option("-c", "--config", required=True, help="Config file or directory of *.yml files.")
@click.option(
    "-j", "--jobs", type=click.IntRange(min=1), default=1, envvar="DSML_JOBS", show_default=True,
    help="Replications run in parallel, defaults to $DSML_JOBS.",
)
@click.option("--seed", type=int, default=None, help="Override the base seed.")
@click.option("-o", "--output", default=None, help="Override the result CSV path.")
def run(config, jobs=1, seed=None, output=None):
    """Run a simulation experiment."""
    env = Env()
    try:
        env.reset(load_configs(config))
        _install_logging(env)
        experiment = ExperimentConfig.from_options(env.options, seed=seed, output=output)
    except ConfigError as e:
        _fail("Parse configure file failed, please check: %s" % e)
    env.set_experiment(experiment)
    logger.info("experiment %s loaded from %s", experiment.name, config)

    if env.get_section("dispatcher").get("use_uvloop"):
        asyncio.set_event_loop_policy(uvloop.EventLoopPolicy())

    rows = run_experiment(experiment, jobs)
    rate = failure_rate(rows)
    where = ", written to %s" % experiment.output if experiment.output else ""
    click.echo("%d rows, %.1f%% failed%s" % (len(rows), 100 * rate, where))
    if rate > experiment.max_failure_rate:
        _fail("too many failed rows: %.1f%% > %.1f%%" % (100 * rate, 100 * experiment.max_failure_rate), EXIT_FAILURES)


@main.command("summarize")
@click.option("-i", "--input", "input_path", required=True, help="Result CSV written by run.")
@click.option("-o", "--output", required=True, help="Summary CSV.")
def summarize_cmd(input_path, output):
    """Mean and sd of every metric per method and sweep value."""
    try:
        out = summarize(input_path, output)
    except (DataFormatError, OSError) as e:
        _fail("Summarize %s failed: %s" % (input_path, e))
    click.echo("%d groups written to %s" % (len(out), output))


@main.command("generate")
@click.option("-s", "--spec", "spec_path", required=True, help="YAML problem description.")
@click.option("-o", "--output", required=True, help="Output directory.")
def generate_cmd(spec_path, output):
    """Write fixture datasets.

    The spec file holds GenSpec fields, at top level or under ``gen``,
    plus an optional ``seeds`` list, one dataset is written per seed.
    """
    try:
        options = load_configs(spec_path)
        fields = dict(section(options, "gen") or options)
        seeds = fields.pop("seeds", None) or [fields.get("seed", 0)]
        specs = [GenSpec(**dict(fields, seed=seed)) for seed in seeds]
    except (ConfigError, ProblemError, TypeError) as e:
        _fail("Parse spec file failed, please check: %s" % e)

    out_dir = Path(output)
    out_dir.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        name = "dsml_%s_p%d_n%d_m%d_s%d_seed%d.txt" % (spec.family, spec.p, spec.n, spec.m, spec.s, spec.seed)
        path = out_dir / name
        save_dataset(path, spec, generate(spec))
        click.echo("wrote %s" % path)


if __name__ == "__main__":
    main()
