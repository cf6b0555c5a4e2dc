import unittest
from pathlib import Path
import json
import tempfile
import os
from unittest.mock import patch
from config import (
    RunConfig,
    DynamicsSettings,
    ToleranceSettings,
    VerifySettings,
    ConfigError,
    ConfigValidationError
)

class TestConfig(unittest.TestCase):
    def setUp(self):
        """Setup test environment before each test."""
        self.temp_dir = tempfile.mkdtemp()
        self.config_path = Path(self.temp_dir) / "test_config.json"

        # Sample valid configuration
        self.sample_config = {
            'command': 'simulate',
            'graph_file': None,
            'generator_spec': 'cycle:6',
            'seed': 7,
            'output_dir': 'results',
            'dynamics': {
                'gamma': 2.0,
                'horizon': 5.0,
                'dt': 0.01,
                'h': None,
                'discrete_steps': 100
            },
            'tolerances': {
                'order': 1e-7
            },
            'verify': {
                'random_graphs': 4,
                'sizes': [8],
                'densities': [0.5]
            },
            'config_version': '1.0'
        }

    def tearDown(self):
        """Clean up temporary files after tests."""
        try:
            os.remove(self.config_path)
            os.rmdir(self.temp_dir)
        except OSError:
            pass

    def test_defaults(self):
        """Test the default settings."""
        config = RunConfig()
        self.assertEqual(config.dynamics, DynamicsSettings(1.0, 10.0, 1e-3, None, 10000))
        self.assertEqual(config.tolerances.order, 1e-8)
        self.assertEqual(config.tolerances.synchrony, 1e-9)
        self.assertEqual(config.verify.sizes, [8, 16, 32])
        self.assertEqual(config.verify.densities, [0.2, 0.5])
        self.assertEqual(config.verify.dynamics_seeds, 5)
        self.assertIs(config.validate(), config)

    def test_missing_file_creates_default(self):
        """Test that loading a missing file writes the defaults."""
        config = RunConfig.load(self.config_path)
        self.assertTrue(self.config_path.exists())
        self.assertEqual(config, RunConfig())
        with open(self.config_path) as f:
            self.assertEqual(json.load(f)['verify']['trees'], 50)

    def test_load_partial_sections(self):
        """Test that missing section keys fall back to defaults."""
        with open(self.config_path, 'w') as f:
            json.dump(self.sample_config, f)

        config = RunConfig.load(self.config_path)
        self.assertEqual(config.generator_spec, 'cycle:6')
        self.assertEqual(config.dynamics.gamma, 2.0)
        self.assertEqual(config.tolerances.order, 1e-7)
        self.assertEqual(config.tolerances.lumping, 1e-8)
        self.assertEqual(config.verify.trees, 50)

    def test_version_compatibility(self):
        """Test configuration version handling."""
        config = RunConfig.load(self.config_path)
        self.assertEqual(config.config_version, '1.0')

        old_config = self.sample_config.copy()
        old_config['config_version'] = '0.9'
        with open(self.config_path, 'w') as f:
            json.dump(old_config, f)

        config = RunConfig.load(self.config_path)
        self.assertEqual(config.config_version, '1.0')  # Should upgrade

    def test_malformed_json(self):
        """Test handling of malformed JSON."""
        with open(self.config_path, 'w') as f:
            f.write('{"invalid": json}')

        with self.assertRaises(ConfigError):
            RunConfig.load(self.config_path)

    def test_invalid_fields(self):
        """Test rejection of unknown keys and out-of-range values."""
        invalid_configs = [
            {'dynamics': {'gamma': -1.0}},
            {'dynamics': {'dt': 0.0}},
            {'dynamics': {'stiffness': 3}},  # Unknown key
            {'tolerances': {'order': 0.0}},
            {'verify': {'densities': [1.5]}},
            {'verify': {'workers': 0}},
            {'verify': {'dynamics_seeds': -1}},
            {'command': 'draw'},
            {'command': 'cep'},  # No graph source
            {'command': 'cep', 'graph_file': 'g.txt', 'generator_spec': 'path:3'},
        ]

        for invalid_config in invalid_configs:
            with self.subTest(config=invalid_config):
                with open(self.config_path, 'w') as f:
                    json.dump(invalid_config, f)

                with self.assertRaises(ConfigValidationError):
                    RunConfig.load(self.config_path)

    @patch('pathlib.Path.open', side_effect=PermissionError)
    def test_file_permissions(self, mock_open):
        """Test handling of file permission errors."""
        with self.assertRaises(ConfigError):
            RunConfig.load(self.config_path)

    def test_config_serialization(self):
        """Test configuration serialization/deserialization."""
        original_config = RunConfig(
            command='bound',
            generator_spec='frucht',
            seed=3,
            dynamics=DynamicsSettings(gamma=0.5, h=0.1),
            tolerances=ToleranceSettings(lumping=1e-6),
            verify=VerifySettings(sizes=[4, 5], workers=2)
        )

        original_config.save(self.config_path)
        loaded_config = RunConfig.load(self.config_path)

        self.assertEqual(original_config, loaded_config)

    def test_overrides(self):
        """Test overrides of top-level and section fields."""
        config = RunConfig()
        updated = config.with_overrides(command='verify', gamma=3.0, order=1e-6, workers=4, seed=None)

        self.assertEqual(updated.command, 'verify')
        self.assertEqual(updated.dynamics.gamma, 3.0)
        self.assertEqual(updated.tolerances.order, 1e-6)
        self.assertEqual(updated.verify.workers, 4)
        self.assertEqual(updated.seed, 0)
        # Original untouched
        self.assertEqual(config.dynamics.gamma, 1.0)
        self.assertIsNone(config.command)

        with self.assertRaises(ConfigValidationError):
            config.with_overrides(colour='red')

    def test_config_update(self):
        """Test configuration updates."""
        config = RunConfig.load(self.config_path)

        config.dynamics.horizon = 2.5
        config.verify.max_depth = 2

        config.save(self.config_path)
        updated = RunConfig.load(self.config_path)

        self.assertEqual(updated.dynamics.horizon, 2.5)
        self.assertEqual(updated.verify.max_depth, 2)

if __name__ == '__main__':
    unittest.main()
