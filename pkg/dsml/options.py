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
"""options manager"""
from pathlib import Path

from ruamel.yaml import YAML

from .errors import ConfigError

yaml = YAML(typ="safe", pure=True)


def parse_yaml_conf(conf_path):
    """parse yaml option file with dsml options.

    return a dict with all options in it.
    """
    try:
        return yaml.load(Path(conf_path))
    except Exception as e:
        raise ConfigError("load configure file %s failed: %s" % (conf_path, e))


def merge_configs(a, b):
    """deep merge dict configs from b to a

    merge all dict&list values, recursely, will modify a object and return"""
    if type(a) != type(b):
        raise ConfigError("Different type of merge objects: %s<=>%s" % (type(a), type(b)))

    if not isinstance(a, (list, dict)):
        raise ConfigError("can only merge dict/list, get %s" % type(a))

    if isinstance(a, list):
        for val in b:
            if val not in a:
                a.append(val)
    else:
        for key, val in b.items():
            if key not in a:
                a[key] = val
                continue

            if not isinstance(a[key], type(val)):
                raise ConfigError("Different types for key %s found: %s<=>%s" % (key, type(a[key]), type(val)))

            if isinstance(val, (list, dict)):
                merge_configs(a[key], val)
            elif a[key] != val:
                raise ConfigError("conflicting values for key %s: %r<=>%r" % (key, a[key], val))
    return a


def load_configs(conf_path):
    """load yaml configure files from a path, support one file and multiple configure files in the path"""
    p = Path(conf_path).expanduser()
    if not p.exists():
        raise ConfigError("configure path %s does not exist" % p)
    if p.is_file():
        return parse_yaml_conf(p) or {}

    merged_config = {}
    for f in sorted(p.rglob("*.yml")):
        config = parse_yaml_conf(f)
        if not config:  # skip empty configure file
            continue
        if not isinstance(config, dict):
            raise ConfigError("configure file %s is not a mapping" % f)
        merge_configs(merged_config, config)
    return merged_config


def dump_yaml(data, path):
    """write plain data as yaml"""
    out = YAML(typ="safe", pure=True)
    out.default_flow_style = False
    with open(path, "w", encoding="utf-8") as f:
        out.dump(data, f)


def section(options, name):
    """a top level mapping of the options, empty when missing"""
    value = (options or {}).get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError("section %r must be a mapping" % name)
    return value
