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
"""log config

records carry a ``runctx`` attribute describing where they come from
(sweep value, replication, method, task), set with :func:`run_context`.
"""
import contextvars
import logging
import logging.config
from contextlib import contextmanager
from pathlib import Path

_run_context = contextvars.ContextVar("dsml_run_context", default="")

CONSOLE_FORMAT = "%(asctime)s %(runctx)s %(levelname)-8s %(message)s"
_console_handler = None


@contextmanager
def run_context(**fields):
    """append key=value pairs to the logging context of the current thread/task"""
    current = _run_context.get()
    extra = " ".join("%s=%s" % (k, v) for k, v in fields.items())
    token = _run_context.set((current + " " + extra).strip())
    try:
        yield
    finally:
        _run_context.reset(token)


def current_context() -> str:
    return _run_context.get()


def get_context_filter():
    class ContextFilter(logging.Filter):
        """
        This is a filter which injects contextual information into the log.
        """

        def filter(self, record):
            ctx = current_context()
            record.runctx = "[%s]" % ctx if ctx else ""
            return True

    return ContextFilter()


def setup_logging(log_config, work_dir, verbose=0):
    """install the dictConfig from the options plus a console handler.

    relative log file names are placed under work_dir.
    """
    work_dir = Path(work_dir)
    if log_config:
        for handler in log_config.get("handlers", {}).values():
            if "filename" in handler:
                filename = Path(handler["filename"])
                if not filename.is_absolute():
                    filename = work_dir / filename
                filename.parent.mkdir(parents=True, exist_ok=True)
                handler["filename"] = str(filename)
        logging.config.dictConfig(log_config)

    global _console_handler
    root_logger = logging.getLogger()
    if _console_handler is not None:
        root_logger.removeHandler(_console_handler)
    handler = logging.StreamHandler()
    handler.addFilter(get_context_filter())
    handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    if verbose > 0:
        handler.setLevel("DEBUG")
        root_logger.setLevel("DEBUG")
    else:
        handler.setLevel("INFO")
        if root_logger.level > logging.INFO or root_logger.level == logging.NOTSET:
            root_logger.setLevel("INFO")
    root_logger.addHandler(handler)
    _console_handler = handler
    return handler
