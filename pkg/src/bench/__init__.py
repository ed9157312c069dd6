"""Benchmark harness: suites, runners, incremental and ablation experiments, DOT export"""
from .ablation import ablation_run, load_variants, variant_means
from .export import export_dot, tree_to_dot, write_dot_files
from .incremental import IncrementalRunner, assert_tree_preserved, incremental_run
from .runner import (RESULT_COLUMNS, SUMMARY_COLUMNS, ResultRow, SuiteRunner, cost_delay_score,
                     run_suite, summarize)
from .suites import SUITES, SuiteConfig, SuitePoint, instance_seed, point_instances, suite_points

__all__ = [
    'ablation_run', 'load_variants', 'variant_means',
    'export_dot', 'tree_to_dot', 'write_dot_files',
    'IncrementalRunner', 'assert_tree_preserved', 'incremental_run',
    'RESULT_COLUMNS', 'SUMMARY_COLUMNS', 'ResultRow', 'SuiteRunner', 'cost_delay_score',
    'run_suite', 'summarize',
    'SUITES', 'SuiteConfig', 'SuitePoint', 'instance_seed', 'point_instances', 'suite_points',
]
