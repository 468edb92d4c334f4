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
"""
runtime Environment

the `env` object is a global singleton holding the options and the
experiment of the running command.
"""
import logging
from pathlib import Path
from typing import Dict, Optional, Union

from .options import section
from .utils import SingletonMeta

logger = logging.getLogger(__name__)


class Env(metaclass=SingletonMeta):
    """Global environment"""

    def __init__(self, *args, **kwargs):
        self.verbose = 0
        self.options: Dict = {}
        self._experiment = None
        self._work_dir = Path(".")

    @property
    def experiment(self):
        """the :class:`~dsml.experiment.ExperimentConfig` being run"""
        return self._experiment

    @property
    def work_dir(self) -> Path:
        return self._work_dir

    def set_work_dir(self, work_dir: Union[Path, str]) -> None:
        self._work_dir = Path(work_dir).expanduser()
        self._work_dir.mkdir(parents=True, exist_ok=True)

    def set_experiment(self, experiment) -> None:
        self._experiment = experiment

    def get_section(self, name: str) -> Dict:
        """a top level section of the options, empty when absent"""
        return section(self.options, name)

    def reset(self, options: Optional[Dict] = None) -> None:
        self.options = options or {}
        self._experiment = None
