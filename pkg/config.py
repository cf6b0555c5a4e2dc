from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional
import json
from pathlib import Path
import logging

logger = logging.getLogger(__name__)

COMMANDS = ("cep", "preorder", "simulate", "quotient", "bound", "verify")
CONFIG_VERSION = "1.0"

@dataclass
class DynamicsSettings:
    """Integration and discrete-map settings."""
    gamma: float = 1.0
    horizon: float = 10.0
    dt: float = 1e-3
    h: Optional[float] = None  # None: largest valid discrete step
    discrete_steps: int = 10000

@dataclass
class ToleranceSettings:
    """Numerical tolerances for the dynamics checks."""
    order: float = 1e-8
    lumping: float = 1e-8
    synchrony: float = 1e-9
    projection: float = 1e-9
    box: float = 1e-9

@dataclass
class VerifySettings:
    """Sizes of the seeded batches run by the verify command."""
    random_graphs: int = 100
    sizes: List[int] = field(default_factory=lambda: [8, 16, 32])
    densities: List[float] = field(default_factory=lambda: [0.2, 0.5])
    trees: int = 50
    max_tree_nodes: int = 8
    small_graphs: int = 30
    max_small_nodes: int = 6
    max_depth: int = 3
    dynamics_seeds: int = 5  # 0 skips the dynamics checks
    workers: int = 1

@dataclass
class RunConfig:
    """Complete configuration of one command run."""
    command: Optional[str] = None
    graph_file: Optional[str] = None
    generator_spec: Optional[str] = None
    seed: int = 0
    output_dir: str = "out"
    dynamics: DynamicsSettings = field(default_factory=DynamicsSettings)
    tolerances: ToleranceSettings = field(default_factory=ToleranceSettings)
    verify: VerifySettings = field(default_factory=VerifySettings)
    config_version: str = CONFIG_VERSION

    @classmethod
    def load(cls, config_path: Path = Path("config.json")) -> 'RunConfig':
        """Load configuration from JSON file, creating a default file if none exists."""
        try:
            if not config_path.exists():
                logger.info("No config file found, creating default configuration")
                config = cls()
                config.save(config_path)
                return config

            with config_path.open('r') as f:
                data = json.load(f)

            return cls._from_dict(data)
        except ConfigValidationError:
            raise
        except Exception as e:
            logger.error(f"Error loading configuration: {e}")
            raise ConfigError(f"Failed to load configuration: {str(e)}") from e

    def save(self, config_path: Path = Path("config.json")) -> None:
        """Save configuration to JSON file."""
        try:
            with config_path.open('w') as f:
                json.dump(self._to_dict(), f, indent=4)
        except Exception as e:
            logger.error(f"Error saving configuration: {e}")
            raise ConfigError(f"Failed to save configuration: {str(e)}") from e

    def with_overrides(self, **overrides: Any) -> 'RunConfig':
        """Copy with non-None overrides applied.

        Keys name top-level fields or section fields ('gamma', 'order', ...);
        section keys are unique across sections.
        """
        top: Dict[str, Any] = {}
        sections: Dict[str, Dict[str, Any]] = {'dynamics': {}, 'tolerances': {}, 'verify': {}}
        for key, value in overrides.items():
            if value is None:
                continue
            for section in sections:
                if key in {f.name for f in fields(getattr(self, section))}:
                    sections[section][key] = value
                    break
            else:
                if key not in {f.name for f in fields(self)}:
                    raise ConfigValidationError(f"Unknown configuration key '{key}'")
                top[key] = value
        for section, values in sections.items():
            if values:
                top[section] = replace(getattr(self, section), **values)
        return replace(self, **top)

    def validate(self) -> 'RunConfig':
        """Check numeric ranges and the graph source; returns self for chaining."""
        if self.command is not None and self.command not in COMMANDS:
            raise ConfigValidationError(f"Unknown command '{self.command}'")
        if self.command not in (None, "verify"):
            if (self.graph_file is None) == (self.generator_spec is None):
                raise ConfigValidationError("Exactly one graph source (--graph or --generate) is required")
        d = self.dynamics
        if not d.gamma >= 0:
            raise ConfigValidationError(f"gamma must be >= 0, got {d.gamma}")
        if not 0 < d.dt <= d.horizon:
            raise ConfigValidationError(f"Need 0 < dt <= horizon, got dt={d.dt}, horizon={d.horizon}")
        if d.h is not None and not d.h > 0:
            raise ConfigValidationError(f"Discrete step h must be > 0, got {d.h}")
        if d.discrete_steps < 0:
            raise ConfigValidationError("discrete_steps must be >= 0")
        for tol in fields(self.tolerances):
            if not getattr(self.tolerances, tol.name) > 0:
                raise ConfigValidationError(f"Tolerance '{tol.name}' must be > 0")
        v = self.verify
        counts = (v.random_graphs, v.trees, v.max_tree_nodes, v.small_graphs, v.max_small_nodes, v.workers)
        if any(c < 1 for c in counts) or v.max_depth < 0 or v.dynamics_seeds < 0:
            raise ConfigValidationError(
                "Verify batch sizes and workers must be positive, max_depth and dynamics_seeds >= 0"
            )
        if any(s < 1 for s in v.sizes) or any(not 0 <= p <= 1 for p in v.densities):
            raise ConfigValidationError("Verify sizes must be >= 1 and densities in [0, 1]")
        return self

    @classmethod
    def _from_dict(cls, data: Dict) -> 'RunConfig':
        """Create configuration from dictionary."""
        try:
            config = cls(
                command=data.get('command'),
                graph_file=data.get('graph_file'),
                generator_spec=data.get('generator_spec'),
                seed=int(data.get('seed', 0)),
                output_dir=data.get('output_dir', "out"),
                dynamics=DynamicsSettings(**data.get('dynamics', {})),
                tolerances=ToleranceSettings(**data.get('tolerances', {})),
                verify=VerifySettings(**data.get('verify', {})),
                config_version=data.get('config_version', CONFIG_VERSION)
            )
        except Exception as e:
            raise ConfigValidationError(f"Invalid configuration data: {str(e)}") from e
        if config.config_version != CONFIG_VERSION:
            logger.info(f"Upgrading configuration from version {config.config_version} to {CONFIG_VERSION}")
            config.config_version = CONFIG_VERSION
        return config.validate()

    def _to_dict(self) -> Dict:
        """Convert configuration to dictionary."""
        return {
            'command': self.command,
            'graph_file': self.graph_file,
            'generator_spec': self.generator_spec,
            'seed': self.seed,
            'output_dir': self.output_dir,
            'dynamics': {f.name: getattr(self.dynamics, f.name) for f in fields(self.dynamics)},
            'tolerances': {f.name: getattr(self.tolerances, f.name) for f in fields(self.tolerances)},
            'verify': {f.name: getattr(self.verify, f.name) for f in fields(self.verify)},
            'config_version': self.config_version
        }

class ConfigError(Exception):
    """Base exception for configuration-related errors."""
    pass

class ConfigValidationError(ConfigError):
    """Raised when configuration validation fails."""
    pass
