"""
Configuration settings for heatpack
"""
import os

from dotenv import load_dotenv

load_dotenv()


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value not in (None, '') else default


class Config:
    """Base configuration"""
    # Logging
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')

    # Parallel map width; 0 means all cores
    THREADS = _env_int('HEATPACK_THREADS', 0)
    OUTPUT_DIR = os.environ.get('HEATPACK_OUTPUT_DIR') or 'runs'

    # Quadrature
    QUAD_RTOL = 1e-10
    QUAD_MAX_LEVEL = 7
    GL_ORDER = 16
    GRAMIAN_RTOL = 1e-8
    TIME_INTERVALS = 32
    TIME_MAX_INTERVALS = 8192

    # Finite-difference oracle
    FD_MIN_STEPS = 64
    BOUNDARY_RTOL = 1e-12
    KAC_TOLERANCE = 1e-4
    ENERGY_RTOL = 1e-6

    # Frame construction
    FRAME_LADDER_STEP = 0.25
    FRAME_MAX_MODES = 250000
    MAX_LOG_INV_EPSILON = 700.0
    NORM_POINTS = {1: 8001, 2: 401, 3: 81}

    # Saddle solver
    SADDLE_STEP_CONSTANT = 1.0
    SADDLE_POLISH = True

    # Gramian bound calibration
    CALIBRATION_MARGIN = 0.05
    CALIBRATION_HORIZONS = (1e-3, 0.1, 0.5, 0.99)

    # Output; every float written to reports, grids, tables and hashes
    FLOAT_DIGITS = 17
    FLOAT_FORMAT = f'.{FLOAT_DIGITS}g'


class DevelopmentConfig(Config):
    """Development configuration"""
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Production configuration"""
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'WARNING')


class TestingConfig(Config):
    """Testing configuration"""
    THREADS = 1
    QUAD_MAX_LEVEL = 6
    TIME_MAX_INTERVALS = 4096
    NORM_POINTS = {1: 4001, 2: 201, 3: 61}


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': Config
}


def get_config(name=None):
    """Resolve a settings class from a name or HEATPACK_ENV"""
    name = name or os.environ.get('HEATPACK_ENV', 'default')
    return config.get(name, Config)
