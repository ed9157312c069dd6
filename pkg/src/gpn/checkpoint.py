"""
Binary checkpoint codec

Layout (little-endian):
    b"GPNC" | uint16 version | uint32 len + config JSON | uint64 step
    | uint32 len + rng-state JSON | uint32 block count
    then per block: uint16 len + name | uint8 ndim | uint32 * ndim shape | float32 data
"""
import json
import logging
import struct
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import torch

from ..core.errors import CheckpointError, InvalidConfigError
from .model import GpnModel, ModelConfig

logger = logging.getLogger(__name__)

MAGIC = b"GPNC"
CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    config: ModelConfig
    parameters: "OrderedDict[str, np.ndarray]"
    step: int = 0
    rng_state: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_model(cls, model: GpnModel, step: int = 0,
                   rng_state: Optional[Dict[str, Any]] = None) -> "Checkpoint":
        parameters = OrderedDict(
            (name, tensor.detach().cpu().numpy().astype("<f4"))
            for name, tensor in model.state_dict().items())
        return cls(model.config, parameters, step, dict(rng_state or {}))

    def build_model(self) -> GpnModel:
        model = GpnModel(self.config)
        expected = model.state_dict()
        if set(expected) != set(self.parameters):
            missing = sorted(set(expected) - set(self.parameters))
            extra = sorted(set(self.parameters) - set(expected))
            raise CheckpointError(f"parameter names do not match the model (missing {missing}, extra {extra})")
        state = OrderedDict()
        for name, reference in expected.items():
            array = self.parameters[name]
            if tuple(array.shape) != tuple(reference.shape):
                raise CheckpointError(
                    f"block {name}: shape {tuple(array.shape)} does not match {tuple(reference.shape)}")
            state[name] = torch.from_numpy(np.array(array, dtype=np.float32))
        model.load_state_dict(state)
        model.eval()
        return model


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    config_json = json.dumps(asdict(checkpoint.config), sort_keys=True).encode("utf-8")
    rng_json = json.dumps(checkpoint.rng_state, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<H", CHECKPOINT_VERSION),
             struct.pack("<I", len(config_json)), config_json,
             struct.pack("<Q", checkpoint.step),
             struct.pack("<I", len(rng_json)), rng_json,
             struct.pack("<I", len(checkpoint.parameters))]
    for name, array in checkpoint.parameters.items():
        encoded = name.encode("utf-8")
        data = np.ascontiguousarray(array, dtype="<f4")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", data.ndim))
        parts.append(struct.pack(f"<{data.ndim}I", *data.shape))
        parts.append(data.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int, what: str) -> bytes:
        if self.offset + count > len(self.data):
            raise CheckpointError(f"{what}: expected {count} bytes")
        chunk = self.data[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_checkpoint(data: bytes, expected_config: Optional[ModelConfig] = None) -> Checkpoint:
    """
    Parse checkpoint bytes

    Raises:
        CheckpointError: bad magic, version or config mismatch, truncated block
    """
    reader = _Reader(data)
    if reader.take(len(MAGIC), "header") != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (version,) = reader.unpack("<H", "header")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})")
    (config_len,) = reader.unpack("<I", "header")
    try:
        config = ModelConfig(**json.loads(reader.take(config_len, "config").decode("utf-8")))
    except (ValueError, TypeError, InvalidConfigError) as exc:
        raise CheckpointError(f"corrupt model config: {exc}") from exc
    if expected_config is not None and config != expected_config:
        raise CheckpointError(f"config mismatch: checkpoint has {config}, expected {expected_config}")
    (step,) = reader.unpack("<Q", "header")
    (rng_len,) = reader.unpack("<I", "header")
    try:
        rng_state = json.loads(reader.take(rng_len, "rng state").decode("utf-8"))
    except ValueError as exc:
        raise CheckpointError(f"corrupt rng state: {exc}") from exc
    (count,) = reader.unpack("<I", "header")

    parameters: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for index in range(count):
        (name_len,) = reader.unpack("<H", f"block #{index}")
        name = reader.take(name_len, f"block #{index}").decode("utf-8")
        (ndim,) = reader.unpack("<B", f"block {name}")
        shape = reader.unpack(f"<{ndim}I", f"block {name}") if ndim else ()
        size = int(np.prod(shape, dtype=np.int64))
        raw = reader.take(4 * size, f"block {name}")
        parameters[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    if reader.offset != len(data):
        logger.warning("ignoring %d trailing bytes after the last block", len(data) - reader.offset)
    return Checkpoint(config, parameters, step, rng_state)


def save_checkpoint(path: Union[str, Path], model: GpnModel, step: int = 0,
                    rng_state: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(Checkpoint.from_model(model, step, rng_state)))
    return path


def load_checkpoint(path: Union[str, Path], expected_config: Optional[ModelConfig] = None) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    return decode_checkpoint(path.read_bytes(), expected_config)


def load_model(path: Union[str, Path], expected_config: Optional[ModelConfig] = None) -> GpnModel:
    checkpoint = load_checkpoint(path, expected_config)
    logger.debug("loaded %s checkpoint at step %d from %s", checkpoint.config.variant, checkpoint.step, path)
    return checkpoint.build_model()
