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
"""Messages exchanged in the single communication round.

Only two kinds of messages exist: the debiased vector a worker uploads to the
master, and the support set the master broadcasts back to every worker.
"""
import threading
from dataclasses import dataclass

import numpy as np

from .core import SupportSet
from .utils import get_id_gen


class Message(object):
    """Message base class

    :param task_id: the worker (task) the message comes from or goes to
    :param msg_id: id of the message, generated when not given

    equal by message id.
    """

    id_gen = get_id_gen(prefix="Msg")
    _id_lock = threading.Lock()

    def __init__(self, task_id, msg_id=None):
        self._task_id = int(task_id)
        if msg_id is None:
            with Message._id_lock:
                msg_id = next(Message.id_gen)
        self._msg_id = msg_id

    @property
    def id(self):
        """ID of the message"""
        return self._msg_id

    @property
    def task_id(self):
        return self._task_id

    @property
    def scalars(self) -> int:
        """number of real numbers carried by the message"""
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Message) and self.id == other.id

    def __hash__(self):
        return hash(self.id)


class DebiasedMessage(Message):
    """worker -> master: the dense debiased estimate of one task

    :param beta_u: length p debiased vector
    :param converged: whether the local lasso converged, a flagged message is still usable
    :param mu: constraint level of the inverse surrogate actually used
    """

    def __init__(self, task_id, beta_u, converged=True, mu=None, msg_id=None):
        super().__init__(task_id, msg_id)
        beta_u = np.array(beta_u, dtype=float, copy=True)
        if beta_u.ndim != 1:
            raise ValueError("debiased vector must be 1d, got shape %s" % (beta_u.shape,))
        beta_u.setflags(write=False)
        self._beta_u = beta_u
        self.converged = converged
        self.mu = mu

    @property
    def beta_u(self) -> np.ndarray:
        return self._beta_u

    @property
    def p(self) -> int:
        return self._beta_u.shape[0]

    @property
    def scalars(self) -> int:
        return self.p

    def __repr__(self):
        return "<DebiasedMessage:id=%s, task=%s, p=%s, converged=%s>" % (
            self.id,
            self.task_id,
            self.p,
            self.converged,
        )


class SupportBroadcast(object):
    """master -> workers: the selected support and the threshold used

    the same broadcast is delivered to every worker.
    """

    def __init__(self, support: SupportSet, lambda_threshold: float):
        if lambda_threshold < 0:
            raise ValueError("threshold must be non-negative, got %s" % lambda_threshold)
        self._support = support
        self._lambda_threshold = float(lambda_threshold)

    @property
    def support(self) -> SupportSet:
        return self._support

    @property
    def lambda_threshold(self) -> float:
        return self._lambda_threshold

    @property
    def scalars(self) -> int:
        return len(self._support)

    def __repr__(self):
        return "<SupportBroadcast:size=%s, threshold=%g>" % (len(self._support), self._lambda_threshold)


@dataclass(frozen=True)
class CommStats:
    """communication ledger of one run

    :param upstream_scalars: real numbers sent workers -> master
    :param downstream_scalars: numbers sent master -> workers, counted per worker
    :param rounds: completed communication rounds
    """

    upstream_scalars: int = 0
    downstream_scalars: int = 0
    rounds: int = 0
