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
"""Message dispatcher

an in-process bus connecting the workers and the master: workers run in a
thread executor, their uploads are collected behind a barrier, the master
broadcast is delivered to every worker mailbox. every scalar that crosses
the bus is counted.
"""
import asyncio
import contextvars
import functools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

from .errors import ProtocolError
from .message import CommStats, DebiasedMessage, SupportBroadcast

logger = logging.getLogger(__name__)


def task_done(task):
    try:
        task.result()
    except asyncio.CancelledError:
        logger.error("task[%s] has been canceled", task.task_name)
    except Exception as e:
        logger.error("task[%s] raise an exception:%s", task.task_name, e)


class Dispatcher(object):
    """One round master/worker bus.

    :param m: number of workers
    :param p: length of every upstream vector
    :param thread_workers: size of the worker thread pool, None for the executor default
    """

    def __init__(self, m: int, p: int, thread_workers: Optional[int] = None):
        self.m = m
        self.p = p
        self._max_thread_workers = thread_workers
        self._thread_executor = None

        self._lock = threading.Lock()
        self._upstream: Dict[int, DebiasedMessage] = {}
        self._mailboxes: Dict[int, SupportBroadcast] = {}
        self._upstream_scalars = 0
        self._downstream_scalars = 0
        self._broadcasted = False

    # --- ledger ---
    @property
    def stats(self) -> CommStats:
        with self._lock:
            return CommStats(
                upstream_scalars=self._upstream_scalars,
                downstream_scalars=self._downstream_scalars,
                rounds=1 if self._broadcasted else 0,
            )

    def send_upstream(self, msg: DebiasedMessage) -> None:
        """deliver one worker's message to the master, only once per worker"""
        if not 0 <= msg.task_id < self.m:
            raise ProtocolError("unknown worker %s" % msg.task_id, msg.task_id)
        if msg.p != self.p:
            raise ProtocolError("message of length %d, expected p=%d" % (msg.p, self.p), msg.task_id)
        with self._lock:
            if self._broadcasted:
                raise ProtocolError("upload after the broadcast", msg.task_id)
            if msg.task_id in self._upstream:
                raise ProtocolError("worker sent more than one message", msg.task_id)
            self._upstream[msg.task_id] = msg
            self._upstream_scalars += msg.scalars
        logger.debug("#Dispatcher upstream %r", msg)

    def collected(self) -> List[DebiasedMessage]:
        """uploaded messages ordered by task id, independent of arrival order"""
        with self._lock:
            if len(self._upstream) != self.m:
                missing = sorted(set(range(self.m)) - set(self._upstream))
                raise ProtocolError("missing uploads from workers %s" % missing)
            return [self._upstream[t] for t in range(self.m)]

    def broadcast(self, msg: SupportBroadcast) -> None:
        """send the support to every worker, only once"""
        with self._lock:
            if self._broadcasted:
                raise ProtocolError("more than one broadcast")
            for t in range(self.m):
                self._mailboxes[t] = msg
            self._downstream_scalars += self.m * msg.scalars
            self._broadcasted = True
        logger.debug("#Dispatcher broadcast %r to %d workers", msg, self.m)

    def receive(self, task_id: int) -> SupportBroadcast:
        with self._lock:
            try:
                return self._mailboxes[task_id]
            except KeyError:
                raise ProtocolError("no broadcast for worker", task_id) from None

    # --- async helpers ---
    @staticmethod
    def schedule_task(cor, name=None):
        """schedule the coroutine to run"""
        task = asyncio.ensure_future(cor)
        task.task_name = name or repr(cor)
        task.add_done_callback(task_done)
        return task

    async def run_in_thread(self, func, *args, **kwargs):
        """run synchronous func in the executor, within a copy of the current context"""
        if not self._thread_executor:
            self._thread_executor = ThreadPoolExecutor(max_workers=self._max_thread_workers)
        loop = asyncio.get_running_loop()
        call = functools.partial(contextvars.copy_context().run, func, *args, **kwargs)
        return await loop.run_in_executor(self._thread_executor, call)

    def shutdown(self) -> None:
        if self._thread_executor:
            self._thread_executor.shutdown(wait=True)
            self._thread_executor = None

    def run(self, cor):
        """run the coroutine to completion on a fresh event loop"""
        try:
            return asyncio.run(cor)
        finally:
            self.shutdown()
