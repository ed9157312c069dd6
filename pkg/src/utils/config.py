"""
YAML configuration loading into frozen config dataclasses
"""
import dataclasses
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, TypeVar, Union, get_type_hints

import yaml

from ..core.errors import InvalidConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")

THREADS_ENV_VAR = "MULTICAST_THREADS"


def build_config(cls: Type[T], values: Mapping[str, Any]) -> T:
    """
    Build a config dataclass from a mapping; nested dataclass fields accept
    mappings too

    Raises:
        InvalidConfigError: unknown keys or invariant violations
    """
    known = {f.name: f for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise InvalidConfigError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")

    hints = get_type_hints(cls)
    kwargs: Dict[str, Any] = {}
    for name, value in values.items():
        target = hints.get(name)
        if isinstance(value, Mapping) and dataclasses.is_dataclass(target):
            value = build_config(target, value)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InvalidConfigError(f"bad {cls.__name__} value: {exc}") from exc


def load_config(path: Optional[Union[str, Path]], cls: Type[T],
                overrides: Optional[Mapping[str, Any]] = None) -> T:
    """
    Read a YAML mapping, apply non-None overrides and build `cls`

    Args:
        path: YAML file, or None for defaults plus overrides
        cls: Config dataclass
        overrides: CLI values; None entries are ignored
    """
    values: Dict[str, Any] = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            try:
                loaded = yaml.safe_load(handle)
            except yaml.YAMLError as exc:
                raise InvalidConfigError(f"{path}: invalid YAML ({exc})") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise InvalidConfigError(f"{path}: top level must be a mapping")
        values.update(loaded)
        logger.debug("loaded %s from %s", cls.__name__, path)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_config(cls, values)


def config_to_dict(config: Any) -> Dict[str, Any]:
    """Plain-data view of a config (tuples become lists) for YAML/JSON output"""
    def plain(value: Any) -> Any:
        if isinstance(value, (tuple, list)):
            return [plain(v) for v in value]
        if isinstance(value, dict):
            return {k: plain(v) for k, v in value.items()}
        return value
    return plain(dataclasses.asdict(config))


def default_threads() -> int:
    """Worker threads from MULTICAST_THREADS, 1 when unset"""
    raw = os.environ.get(THREADS_ENV_VAR)
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError as exc:
        raise InvalidConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc
    if threads < 1:
        raise InvalidConfigError(f"{THREADS_ENV_VAR} must be >= 1, got {threads}")
    return threads
