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
"""Distributed multi-task sparse regression."""
from . import __version__
from .core import CoefficientMatrix, Family, SolverOptions, SupportSet, TaskData
from .datagen import GenSpec, generate
from .protocol import DsmlResult, ThresholdRule, run_dsml
