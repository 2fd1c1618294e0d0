"""
Unit tests for experiment configs, campaigns, result files and the command line.
"""

import json
import logging

import pandas as pd
import pytest

from exceptions import ConfigError, DependencyError
from harness import cli
from harness.campaigns import (
    BEAM_COLUMNS,
    DFOH_COLUMNS,
    load_poison_traces,
    run_beam_campaign,
    run_dfoh_campaign,
    run_gen_topology,
    run_monitor_sweep,
)
from harness.experiment_config import load_config
from harness.logging_setup import configure_logging
from harness.results import read_table, summarize, write_table
from harness.seeds import derive_seed, stage_rng
from harness.world import build_world


def variant(config, out, **sections):
    """Copy of a resolved config with some sections replaced and a new output directory."""
    data = config.to_dict()
    for name, values in sections.items():
        data[name].update(values)
    data['out'] = str(out)
    return load_config(data)


class TestExperimentConfig:
    """Test suite for loading experiment configs."""

    def test_defaults_need_seed(self):
        with pytest.raises(ConfigError):
            load_config()
        assert load_config(seed=3).seed == 3

    @pytest.mark.parametrize('data', [
        {'seed': 1, 'colour': 'red'},
        {'seed': 1, 'dfoh': {'trees': 5}},
        {'seed': 1, 'campaign': {'victims': 'some'}},
        {'seed': 1, 'campaign': {'n_distinct': [4, 2]}},
        {'seed': 1, 'dfoh': {'ablate': ['colour']}},
        {'seed': 1, 'attack': {'allow_transit_augmentation': True, 'wait_days': 5}},
        {'seed': 1, 'topology': {'source': 'files'}},
        {'seed': 'seven'},
        {'seed': 1, 'jobs': 0},
    ])
    def test_rejected(self, data):
        with pytest.raises(ConfigError):
            load_config(data)

    def test_normalisation(self):
        config = load_config({'seed': 1, 'monitors': {'m_grid': [100, 10, 100, 1]},
                              'campaign': {'n_distinct': [3], 'victims': 'all'}, 'beam': {'lambda': 0.25}})
        assert config.monitors.m_grid == [1, 10, 100]
        assert config.campaign.n_distinct_range == [3]
        assert config.campaign.victim_sample() is None
        assert config.beam.lam == 0.25

    def test_hash_ignores_out_and_jobs(self, tiny_config):
        assert tiny_config.with_overrides(out='elsewhere', jobs=4).config_hash() == tiny_config.config_hash()
        assert tiny_config.with_overrides(seed=8).config_hash() != tiny_config.config_hash()

    def test_file(self, tmp_path, tiny_config):
        path = tmp_path / 'experiment.json'
        path.write_text(json.dumps(tiny_config.to_dict()))
        assert load_config(path).config_hash() == tiny_config.config_hash()
        assert load_config(path, seed=9).seed == 9

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'absent.json')
        (tmp_path / 'broken.json').write_text('{"seed": ')
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'broken.json')


class TestSeeds:
    """Test suite for labelled seed streams."""

    def test_stable_and_distinct(self):
        assert derive_seed(7, 'topology') == derive_seed(7, 'topology')
        assert derive_seed(7, 'topology') != derive_seed(7, 'monitors')
        assert derive_seed(7, 'topology') != derive_seed(8, 'topology')
        assert 0 <= derive_seed(7, 'topology') < 2 ** 63

    def test_stage_rng(self):
        assert stage_rng(1, 'a').random() == stage_rng(1, 'a').random()


class TestLogging:
    """Test suite for command-line logging setup."""

    def test_level(self):
        configure_logging(level='warning')
        assert logging.getLogger().level == logging.WARNING

    def test_log_file(self, tmp_path):
        log_file = tmp_path / 'run.log'
        configure_logging({'log_file': str(log_file)}, 'info')
        logging.getLogger('poisonsim.test').info('hello from the test')
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert 'hello from the test' in log_file.read_text()
        configure_logging(level='info')


class TestWorld:
    """Test suite for building the experiment world."""

    def test_tiny_world(self, tiny_world):
        assert len(tiny_world.graph) == 60
        assert len(tiny_world.monitors) == 10
        assert list(tiny_world.monitors) == sorted(tiny_world.monitors)
        assert tiny_world.events
        assert all(e.path[0] == e.monitor for e in tiny_world.events)
        assert set(tiny_world.observed_origins()) <= set(tiny_world.graph.nodes)

    def test_deterministic(self, tiny_config, tiny_world):
        world = build_world(tiny_config)
        assert world.monitors == tiny_world.monitors
        assert world.events == tiny_world.events

    def test_files_mode_reproduces_world(self, tiny_config, tiny_world):
        run_gen_topology(tiny_config, tiny_world)
        out = tiny_config.out
        config = variant(tiny_config, out, topology={
            'source': 'files',
            'relationships_file': f'{out}/relationships.txt',
            'metadata_file': f'{out}/metadata.json',
            'irr_file': f'{out}/irr.txt',
        })
        world = build_world(config)
        assert set(world.graph.edges) == set(tiny_world.graph.edges)
        assert world.irr_links == tiny_world.irr_links
        assert world.monitors == tiny_world.monitors

    def test_missing_topology_file(self, tiny_config, tmp_path):
        config = variant(tiny_config, tmp_path, topology={'source': 'files',
                                                          'relationships_file': str(tmp_path / 'absent.txt')})
        with pytest.raises(ConfigError):
            build_world(config)


class TestResults:
    """Test suite for result tables and summaries."""

    def test_canonical_order(self, tmp_path):
        frame = pd.DataFrame({'a': [2, 1, 2], 'b': [1, 5, 0]})
        path = write_table(frame, tmp_path / 'sub' / 't.csv', ['a', 'b'])
        assert path.read_text() == 'a,b\n1,5\n2,0\n2,1\n'

    def test_missing_table(self, tmp_path):
        with pytest.raises(DependencyError):
            read_table(tmp_path / 'absent.csv')

    def test_summarize_empty_directory(self, tmp_path):
        with pytest.raises(DependencyError):
            summarize(tmp_path)


class TestCampaigns:
    """Test suite for end-to-end campaigns on the tiny world."""

    def test_gen_topology(self, tiny_config, tiny_world):
        bundle = run_gen_topology(tiny_config, tiny_world)
        out = bundle.out_dir
        for name in ('relationships.txt', 'metadata.json', 'irr.txt', 'routes.txt', 'prefixes.csv'):
            assert (out / name).exists()
        prefixes = bundle.table('prefixes')
        assert len(prefixes) == 60
        assert int(prefixes['monitor'].sum()) == 10

        manifest = json.loads(bundle.manifest.read_text())
        assert bundle.manifest.name == 'gen-topology.manifest.json'
        assert manifest['config_hash'] == tiny_config.config_hash()
        assert manifest['seed'] == 7
        assert manifest['wall_time_seconds'] is not None
        assert manifest['tables'] == {'prefixes': 'prefixes.csv'}
        assert manifest['summary']['ases'] == 60
        assert 'numpy' in manifest['versions']

    def test_no_attackers(self, tiny_config, tmp_path):
        config = variant(tiny_config, tmp_path / 'empty', campaign={'n_attackers': 0})
        bundle = run_dfoh_campaign(config)
        assert bundle.summary == {'pairs': 0, 'failed_pairs': 0}
        attacks = bundle.table('dfoh_attacks')
        assert attacks.empty
        assert list(attacks.columns) == DFOH_COLUMNS

        with pytest.raises(DependencyError):
            run_monitor_sweep(config)
        assert not (tmp_path / 'empty' / 'eval-monitors.manifest.json').exists()

    def test_dfoh_campaign_independent_of_jobs(self, tiny_config, tiny_world, tmp_path):
        serial = run_dfoh_campaign(variant(tiny_config, tmp_path / 'serial'), tiny_world)
        parallel = run_dfoh_campaign(variant(tiny_config, tmp_path / 'parallel').with_overrides(jobs=2), tiny_world)

        assert serial.tables.keys() == parallel.tables.keys()
        for name, path in serial.tables.items():
            assert path.read_bytes() == parallel.tables[name].read_bytes(), name

        attacks = serial.table('dfoh_attacks')
        assert len(attacks) + serial.summary['failed_pairs'] == 2 * 3
        assert set(attacks['links_used']) <= {0, 1, 2}
        histogram = serial.table('dfoh_success_histogram')
        assert histogram['n_victims'].sum() == len(attacks)

    def test_monitor_sweep(self, tiny_config, tiny_world):
        nodes = sorted(tiny_world.graph.nodes)
        traces = [(nodes[-1], nodes[-2]), (nodes[-1], nodes[-3]), (nodes[-4], nodes[-5])]
        bundle = run_monitor_sweep(tiny_config, tiny_world.graph, traces)
        sweep = bundle.table('monitor_sweep')
        assert len(sweep) == 2 * 2 * 3
        assert set(sweep['m']) == {1, 5}
        assert bundle.summary['best-case@5'] == 1.0

    def test_traces_read_back(self, tmp_path):
        write_table(pd.DataFrame({'attacker': [4], 'victim': [9], 'announcer': [4], 'forged_origin': [12]}),
                    tmp_path / 'dfoh_poison_traces.csv')
        assert load_poison_traces(tmp_path) == [(4, 12)]

    def test_beam_campaign(self, tiny_config, tiny_world):
        bundle = run_beam_campaign(tiny_config, tiny_world)
        pollution = bundle.table('beam_pollution')
        assert list(pollution.columns) == BEAM_COLUMNS
        assert len(pollution) == 2 * 3
        assert sorted(set(pollution['n_distinct'])) == [0, 1, 2]
        clean = pollution[pollution['n_distinct'] == 0]
        assert (clean['theta_after'] == clean['theta_before']).all()
        assert (clean['undetected_after'] == clean['undetected_before']).all()
        assert bundle.summary['rows'] == 6


class TestCli:
    """Test suite for the command-line entry point."""

    @pytest.fixture
    def config_file(self, tmp_path, tiny_config):
        path = tmp_path / 'experiment.json'
        path.write_text(json.dumps(tiny_config.to_dict()))
        return path

    def test_gen_topology_and_report(self, config_file, tmp_path, capsys):
        out = tmp_path / 'cli'
        assert cli.main(['gen-topology', '--config', str(config_file), '--out', str(out)]) == 0
        assert (out / 'relationships.txt').exists()

        assert cli.main(['report', '--out', str(out)]) == 0
        printed = capsys.readouterr().out
        assert 'gen-topology: seed 7' in printed
        assert 'prefixes: 60 rows (prefixes.csv)' in printed

    def test_seed_override(self, config_file, tmp_path):
        out = tmp_path / 'seeded'
        assert cli.main(['gen-topology', '--config', str(config_file), '--out', str(out), '--seed', '11']) == 0
        assert json.loads((out / 'gen-topology.manifest.json').read_text())['seed'] == 11

    def test_config_error(self, tmp_path):
        assert cli.main(['gen-topology', '--config', str(tmp_path / 'absent.json')]) == 2
        (tmp_path / 'bad.json').write_text('{"seed": 1, "colour": "red"}')
        assert cli.main(['gen-topology', '--config', str(tmp_path / 'bad.json')]) == 2

    def test_data_errors(self, config_file, tmp_path):
        assert cli.main(['report', '--out', str(tmp_path / 'nothing')]) == 3
        assert cli.main(['eval-monitors', '--config', str(config_file), '--out', str(tmp_path / 'nothing')]) == 3

    def test_internal_error(self, config_file, monkeypatch):
        def broken(config):
            raise RuntimeError('boom')

        monkeypatch.setitem(cli.COMMANDS, 'gen-topology', broken)
        assert cli.main(['gen-topology', '--config', str(config_file)]) == 4

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as info:
            cli.main(['frobnicate'])
        assert info.value.code == 2


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
