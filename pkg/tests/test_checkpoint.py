"""
Binary checkpoint codec and loading a trained model back as a solver
"""
import struct

import pytest
import torch

from src.core import CheckpointError, attach_virtual_hub, validate
from src.gpn import Checkpoint, GpnModel, GpnSolver, ModelConfig, load_checkpoint, save_checkpoint
from src.gpn.checkpoint import decode_checkpoint, encode_checkpoint

SMALL = ModelConfig(hidden_dim=8, heads=2)


@pytest.fixture(scope="module")
def default_bytes():
    torch.manual_seed(0)
    return encode_checkpoint(Checkpoint.from_model(GpnModel()))


def test_round_trip_is_bitwise(tmp_path):
    torch.manual_seed(0)
    model = GpnModel(SMALL)
    rng_state = {"numpy": {"state": 12345}}
    path = save_checkpoint(tmp_path / "nested" / "gpn.ckpt", model, step=42, rng_state=rng_state)
    checkpoint = load_checkpoint(path, expected_config=SMALL)
    assert checkpoint.step == 42
    assert checkpoint.rng_state == rng_state
    assert encode_checkpoint(checkpoint) == path.read_bytes()
    restored = checkpoint.build_model()
    for (name, a), (_, b) in zip(model.state_dict().items(), restored.state_dict().items()):
        assert torch.equal(a, b), name


def test_block_order_ends_with_the_scorer(default_bytes):
    names = list(decode_checkpoint(default_bytes).parameters)
    assert names[0].startswith("encoder.")
    assert names[-2:] == ["scorer.W2", "scorer.W3"]


def test_truncation_names_the_block(default_bytes):
    # drop W3 entirely and the tail of W2's data
    w3_block = 2 + len("scorer.W3") + 1 + 8 + 128 * 128 * 4
    truncated = default_bytes[:len(default_bytes) - w3_block - 100]
    with pytest.raises(CheckpointError, match="block scorer.W2: expected 65536 bytes"):
        decode_checkpoint(truncated)


def test_bad_magic(default_bytes):
    with pytest.raises(CheckpointError, match="magic"):
        decode_checkpoint(b"XXXX" + default_bytes[4:])


def test_unsupported_version(default_bytes):
    data = default_bytes[:4] + struct.pack("<H", 99) + default_bytes[6:]
    with pytest.raises(CheckpointError, match="version 99"):
        decode_checkpoint(data)


def test_config_mismatch(default_bytes):
    with pytest.raises(CheckpointError, match="config mismatch"):
        decode_checkpoint(default_bytes, expected_config=SMALL)


def test_shape_mismatch_on_build(default_bytes):
    checkpoint = decode_checkpoint(default_bytes)
    checkpoint.parameters["scorer.W2"] = checkpoint.parameters["scorer.W2"][:4]
    with pytest.raises(CheckpointError, match="scorer.W2"):
        checkpoint.build_model()


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "absent.ckpt")


def test_solver_from_checkpoint_is_deterministic(tmp_path, regular_instance):
    torch.manual_seed(5)
    path = save_checkpoint(tmp_path / "gpn.ckpt", GpnModel(SMALL))
    solver = GpnSolver.from_checkpoint(path)
    first = solver.solve(regular_instance)
    second = GpnSolver.from_checkpoint(path).solve(regular_instance)
    assert first.tree == second.tree
    assert first.cost == second.cost
    hubbed = attach_virtual_hub(regular_instance)
    assert validate(hubbed.graph, first.tree, hubbed.source, hubbed.demands).ok
    assert first.solver_tag == "gpn"
