"""
Configuration package for heatpack
"""
from .settings import Config, DevelopmentConfig, ProductionConfig, TestingConfig, config, get_config
from .experiment import ExperimentConfig, load_experiment, parse_experiment

__all__ = [
    'Config',
    'DevelopmentConfig',
    'ProductionConfig',
    'TestingConfig',
    'config',
    'get_config',
    'ExperimentConfig',
    'load_experiment',
    'parse_experiment'
]
