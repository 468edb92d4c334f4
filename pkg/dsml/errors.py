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
"""Exceptions and warnings raised by dsml."""


class DsmlError(Exception):
    """Base class of all dsml errors"""


class ProblemError(DsmlError, ValueError):
    """Invalid task data or inconsistent multi-task problem.

    :param task_index: index of the offending task, if any
    """

    def __init__(self, msg, task_index=None):
        super().__init__(msg)
        self.task_index = task_index


class SingularSupportError(DsmlError):
    """Restricted Gram matrix is numerically singular."""

    def __init__(self, msg, condition):
        super().__init__(msg)
        self.condition = condition


class InfeasibleError(DsmlError):
    """The inverse surrogate program stayed infeasible after all escalations."""

    def __init__(self, msg, mu, escalations):
        super().__init__(msg)
        self.mu = mu
        self.escalations = escalations


class ProtocolError(DsmlError):
    """Violation of the one-round master/worker protocol."""

    def __init__(self, msg, task_id=None):
        super().__init__(msg)
        self.task_id = task_id


class ConfigError(DsmlError):
    """Invalid experiment configure."""


class DataFormatError(DsmlError):
    """Malformed dataset or result file.

    :param line: 1-based line number where parsing failed
    """

    def __init__(self, msg, line=None):
        if line is not None:
            msg = "line %s: %s" % (line, msg)
        super().__init__(msg)
        self.line = line


class DsmlWarning(UserWarning):
    """Non fatal validation warning"""


class WorkerError(DsmlError):
    """A worker failed during the protocol, the run is aborted.

    :param task_id: the failing worker's task
    """

    def __init__(self, msg, task_id):
        super().__init__("task %s: %s" % (task_id, msg))
        self.task_id = task_id
