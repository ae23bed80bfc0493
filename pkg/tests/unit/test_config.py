import math

import pytest

from config.experiment import MAX_FIXED_EPSILON, load_experiment, parse_experiment
from config.settings import Config, TestingConfig, get_config
from errors import ConfigError


def test_defaults_describe_the_unit_interval():
    experiment = parse_experiment('')
    assert experiment.d == 1
    assert experiment.resolution_tuple == (256,)
    assert experiment.eta == 0.1
    assert experiment.M == 0.25
    assert experiment.eta0 == 'auto'
    assert experiment.eta_search == 'certified'


def test_comments_and_blank_lines_are_ignored():
    experiment = parse_experiment('# header\n\nT=0.02  # shorter run\nN=4\n')
    assert experiment.T == 0.02
    assert experiment.N == 4


@pytest.mark.parametrize('text', [
    'colour=blue\n',
    'T\n',
    'T=0.01\nT=0.02\n',
    'eta=1.5\n',
    'M=0\n',
    'eta_search=fixed\n',
    'domain_lower=0,0\ndomain_upper=1\n',
    'resolution=2\n',
])
def test_invalid_files_raise_config_error(text):
    with pytest.raises(ConfigError):
        parse_experiment(text)


def test_fixed_epsilon_must_not_exceed_e_to_minus_e():
    assert MAX_FIXED_EPSILON == pytest.approx(math.exp(-math.e))
    with pytest.raises(ConfigError):
        parse_experiment('eta_search=fixed\nepsilon=0.1\n')
    experiment = parse_experiment('eta_search=fixed\nepsilon=0.001\n')
    assert experiment.epsilon == 0.001


def test_single_resolution_is_broadcast_over_axes():
    experiment = parse_experiment('domain_lower=0,0\ndomain_upper=1,2\ncenter=0.5,1\nresolution=32\n')
    assert experiment.d == 2
    assert experiment.resolution_tuple == (32, 32)
    assert experiment.domain().volume == pytest.approx(2.0)


def test_config_hash_tracks_values_not_layout():
    a = parse_experiment('T=0.01\nN=4\n')
    b = parse_experiment('N=4\n# same values\nT=0.01\n')
    c = parse_experiment('T=0.02\nN=4\n')
    assert a.config_hash == b.config_hash
    assert a.config_hash != c.config_hash
    assert len(a.config_hash) == 64


def test_overrides_are_revalidated():
    experiment = parse_experiment('')
    assert experiment.with_overrides(threads=4, seed=None).threads == 4
    with pytest.raises(ConfigError):
        experiment.with_overrides(trials=0)


def test_load_experiment_reads_fixture(fixtures_dir):
    experiment = load_experiment(fixtures_dir / 'fast_1d.cfg')
    assert experiment.resolution_tuple == (64,)
    assert experiment.trials == 2


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment(tmp_path / 'absent.cfg')


def test_settings_profiles():
    assert get_config('testing') is TestingConfig
    assert get_config('no-such-profile') is Config
    assert TestingConfig.THREADS == 1
