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
"""Method manager

An estimation method is an importable Python module that has
a function with the signature::

    def fit(problem, tuning):
        # return a MethodResult

and a ``method_name`` attribute. Methods shipped with dsml live in this
package and can be referenced by their short name (``lasso``,
``group_lasso``, ``refit_group_lasso``, ``dsml``,
``debiased_group_lasso``), other methods by their full module name, as long
as they can be imported by Python's standard import mechanism or live in a
configured ``method_paths`` directory.
"""
import logging
import sys
from collections import OrderedDict
from importlib import import_module
from typing import Dict, List, Sequence

from ..errors import ConfigError

logger = logging.getLogger(__name__)

BUILTIN_METHODS = ("lasso", "group_lasso", "refit_group_lasso", "dsml", "debiased_group_lasso")


class add_to_syspath(object):
    """A context for add a directory to sys.path for a second."""

    def __init__(self, paths, prepend=True):
        self.added = False
        self.paths = list(paths or [])
        self.prepend = prepend

    def __enter__(self):
        if self.paths:
            if self.prepend:
                for path in self.paths:
                    sys.path.insert(0, path)
            else:
                sys.path.extend(self.paths)
            self.added = True

    def __exit__(self, type, value, traceback):
        if self.added:
            for path in self.paths:
                try:
                    sys.path.remove(path)
                except ValueError:
                    pass
        # Returning False causes any exceptions to be re-raised.
        return False


def module_path(name: str) -> str:
    """full module path of a method name"""
    if name in BUILTIN_METHODS:
        return "%s.%s" % (__name__, name)
    return name


def import_method(name: str, method_paths: Sequence[str] = ()):
    """import and check a method module"""
    with add_to_syspath(method_paths):
        try:
            module = import_module(module_path(name))
        except ImportError as e:
            raise ConfigError("cannot import method %s: %s" % (name, e))
    if not callable(getattr(module, "fit", None)):
        raise ConfigError("invalid method %s: no fit function" % name)
    return module


class MethodManager(object):
    """Resolve and load the estimation methods of an experiment.

    :param method_paths: extra directories searched for method modules
    :param method_groups: mapping of group name to a list of methods
    """

    def __init__(self, method_paths=(), method_groups=None):
        self._method_paths = list(method_paths or [])
        self._method_groups: Dict[str, List[str]] = dict(method_groups or {})
        self._loaded = OrderedDict()

    @property
    def method_paths(self) -> List[str]:
        return list(self._method_paths)

    def expand(self, names: Sequence[str]) -> List[str]:
        """replace group names by their members, keep the first occurrence of duplicates"""
        out, pending, seen_groups = [], list(names), set()
        while pending:
            name = pending.pop(0)
            if name in self._method_groups:
                if name in seen_groups:
                    continue
                seen_groups.add(name)
                pending = list(self._method_groups[name]) + pending
            elif name not in out:
                out.append(name)
        return out

    def load_methods(self, names: Sequence[str]) -> List[str]:
        """load every method (or group), return the expanded method names"""
        logger.debug("#Methods loading %s...", list(names))
        expanded = self.expand(names)
        if not expanded:
            raise ConfigError("no methods configured")
        for name in expanded:
            if name in self._loaded:
                logger.warning("#Methods method[%s] has been loaded, skip...", name)
                continue
            self._loaded[name] = import_method(name, self._method_paths)
            logger.debug("#Methods method[%s] loaded.", name)
        return expanded

    def get(self, name: str):
        try:
            return self._loaded[name]
        except KeyError:
            raise ConfigError("method %s is not loaded" % name) from None
