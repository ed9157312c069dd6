"""Graph policy network: model, policy, training, gradient check and checkpoints"""
from .checkpoint import Checkpoint, load_checkpoint, load_model, save_checkpoint
from .gradcheck import GradCheckReport, check_gradients
from .model import GpnModel, ModelConfig, VARIANTS, variant_config
from .policy import GpnPolicy, replay_log_probs
from .solver import GpnSolver
from .trainer import MovingAverageBaseline, TrainConfig, backward, learning_rate_at, policy_loss, train

__all__ = [
    'Checkpoint', 'load_checkpoint', 'load_model', 'save_checkpoint',
    'GradCheckReport', 'check_gradients',
    'GpnModel', 'ModelConfig', 'VARIANTS', 'variant_config',
    'GpnPolicy', 'replay_log_probs',
    'GpnSolver',
    'MovingAverageBaseline', 'TrainConfig', 'backward', 'learning_rate_at', 'policy_loss', 'train',
]
