"""Core module initialization"""
from .codec import parse_instance, parse_tree, read_document, serialize_instance, serialize_tree
from .errors import (BudgetExceededError, CheckpointError, CycleError, GenerationError, InfeasibleError,
                     InstanceFormatError, InvalidActionError, InvalidConfigError, MulticastError,
                     NonFiniteError, TrainingDivergedError, TreeError)
from .flow_tree import (FlowAssignment, MulticastTree, ValidationReport, compute_flows,
                        level_decomposition_cost, merge_path, tree_cost, validate,
                        validate_overlay)
from .graph import (DEMAND_LEVELS, HUB_EDGE_COST, DemandVector, GenConfig, NetworkGraph,
                    ProblemInstance, assign_demands, attach_virtual_hub, generate_instance,
                    sample_added_users, solver_graph)

__all__ = [
    'BudgetExceededError', 'CheckpointError', 'CycleError', 'GenerationError', 'InfeasibleError',
    'InstanceFormatError', 'InvalidActionError', 'InvalidConfigError', 'MulticastError',
    'NonFiniteError', 'TrainingDivergedError', 'TreeError',
    'FlowAssignment', 'MulticastTree', 'ValidationReport', 'compute_flows',
    'level_decomposition_cost', 'merge_path', 'tree_cost', 'validate', 'validate_overlay',
    'DEMAND_LEVELS', 'HUB_EDGE_COST', 'DemandVector', 'GenConfig', 'NetworkGraph',
    'ProblemInstance', 'assign_demands', 'attach_virtual_hub', 'generate_instance',
    'sample_added_users', 'solver_graph',
    'parse_instance', 'parse_tree', 'read_document', 'serialize_instance', 'serialize_tree',
]
