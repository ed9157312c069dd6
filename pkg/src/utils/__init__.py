"""
Utility modules for the multicast routing toolkit
"""
from .config import build_config, config_to_dict, default_threads, load_config
from .logging_setup import setup_logging
from .trajectory_logger import TrajectoryLogger

__all__ = ['build_config', 'config_to_dict', 'default_threads', 'load_config',
           'setup_logging', 'TrajectoryLogger']
