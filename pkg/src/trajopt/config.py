"""Flat ``key = value`` run configuration files.

One assignment per line; ``#`` starts a comment.  Keys are the field
names of :class:`~trajopt.optimizer.OptimConfig` and
:class:`~trajopt.core.HardwareSpec`.  Sequences are comma separated::

    mode = projection
    lr = 0.001
    adam_betas = 0.9, 0.999
    decimation_levels = 16, 8, 4, 2, 1
    matrix_size = 64
"""

from __future__ import annotations

import dataclasses
import typing

from .core import HardwareSpec
from .optimizer import OptimConfig

__all__ = ["parse_config", "load_config", "format_config", "save_config"]


def _fields(cls):
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


_OPTIM = _fields(OptimConfig)
_HW = _fields(HardwareSpec)


def _convert(key, raw: str, hint):
    origin = typing.get_origin(hint)
    if origin is tuple:
        args = typing.get_args(hint)
        elem = args[0]
        return tuple(elem(p.strip()) for p in raw.split(",") if p.strip())
    if hint is bool:
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if hint is int:
        return int(raw)
    if hint is float:
        return float(raw)
    return raw


def parse_config(text: str, **overrides) -> tuple[OptimConfig, HardwareSpec]:
    optim, hw = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in _OPTIM:
            optim[key] = _convert(key, raw, _OPTIM[key])
        elif key in _HW:
            hw[key] = _convert(key, raw, _HW[key])
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    for key, value in overrides.items():
        if value is None:
            continue
        (optim if key in _OPTIM else hw)[key] = value
    return OptimConfig(**optim), HardwareSpec(**hw)


def load_config(path=None, **overrides) -> tuple[OptimConfig, HardwareSpec]:
    text = "" if path is None else open(path).read()
    return parse_config(text, **overrides)


def _fmt(value) -> str:
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: OptimConfig, spec: HardwareSpec) -> str:
    lines = [f"{k} = {_fmt(v)}" for k, v in dataclasses.asdict(cfg).items()]
    lines += [f"{k} = {_fmt(v)}" for k, v in dataclasses.asdict(spec).items()]
    return "\n".join(lines) + "\n"


def save_config(path, cfg: OptimConfig, spec: HardwareSpec) -> None:
    with open(path, "w") as fh:
        fh.write(format_config(cfg, spec))
