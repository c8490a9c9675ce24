"""
Aseo Configuration Loader

Layered settings for the solver, the enumeration strategies, the Bayesian
front end and the benchmark runner: built-in defaults, then a JSON file,
then the environment, then command-line overrides.
"""

import os
import copy
import json
import logging
from typing import Any, Dict, List, Mapping, Optional

from .errors import ContractError
from .program import DEFAULT_ORACLE_LIMIT
from .report import FORMATS
from .solver import SearchConfig
from .strategies import Mode

logger = logging.getLogger(__name__)

ORACLE_LIMIT_ENV = "ASEO_ORACLE_LIMIT"
BRANCHINGS = ("fixed", "shuffled")


def _positive_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value > 0


def _positive_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0


class Config:
    """Application configuration"""

    DEFAULT_CONFIG = {
        "solver": {
            "branching": "fixed",
            "seed": None,
            "oracle_verify": None,
            "oracle_limit": DEFAULT_ORACLE_LIMIT
        },
        "enumeration": {
            "mode": "weight",
            "k": None,
            "timeout": 1800
        },
        "output": {
            "format": "text"
        },
        "bayes": {
            "scale": 1000000,
            "k": 10,
            "mode": "weight",
            "simplify": True
        },
        "bench": {
            "modes": ["weight", "smart"],
            "k_sweep": [10, 100, 1000, 10000],
            "timeout": 1800,
            "jobs": 1
        },
        "logging": {
            "level": "INFO",
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        }
    }

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration

        Args:
            config_path: Path to configuration file (JSON)
        """
        self.config_path = config_path
        self.config = copy.deepcopy(self.DEFAULT_CONFIG)

        if config_path:
            self.load_config(config_path)
        self._apply_environment()

    def load_config(self, config_path: str):
        """
        Merge a JSON file over the current settings

        A missing or unreadable file leaves the settings untouched.

        Args:
            config_path: Path to configuration file
        """
        if not os.path.exists(config_path):
            logger.warning(f"Configuration file not found: {config_path}")
            return

        logger.info(f"Loading configuration from: {config_path}")
        try:
            with open(config_path, 'r') as f:
                user_config = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading configuration: {e}")
            logger.warning("Using default configuration")
            return

        if not isinstance(user_config, dict):
            logger.error(f"Configuration root must be an object, got {type(user_config).__name__}")
            return
        self._merge_config(self.config, user_config)

    def _apply_environment(self):
        value = os.getenv(ORACLE_LIMIT_ENV)
        if value is None:
            return
        try:
            self.set("solver.oracle_limit", int(value))
        except ValueError:
            logger.warning(f"Ignoring non-integer {ORACLE_LIMIT_ENV}={value!r}")

    def _merge_config(self, base: Dict, override: Dict):
        for key, value in override.items():
            if isinstance(base.get(key), dict) and isinstance(value, dict):
                self._merge_config(base[key], value)
            else:
                base[key] = copy.deepcopy(value)

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation

        Args:
            key_path: Configuration key path (e.g., "enumeration.mode")
            default: Default value if key not found

        Returns:
            Configuration value
        """
        node: Any = self.config
        for key in key_path.split('.'):
            if not isinstance(node, dict) or key not in node:
                return default
            node = node[key]
        return node

    def set(self, key_path: str, value: Any):
        """
        Set configuration value using dot notation, creating sections on the way

        Args:
            key_path: Configuration key path (e.g., "bench.jobs")
            value: Value to set
        """
        *sections, leaf = key_path.split('.')
        node = self.config
        for key in sections:
            node = node.setdefault(key, {})
        node[leaf] = value

    def override(self, values: Mapping[str, Any]):
        """
        Apply command-line overrides; None means the flag was not given

        Args:
            values: Key path to value
        """
        for key_path, value in values.items():
            if value is not None:
                self.set(key_path, value)

    def problems(self) -> List[str]:
        """Every setting outside its allowed range, as messages"""
        found = []
        modes = [mode.value for mode in Mode]

        for key in ("enumeration.mode", "bayes.mode"):
            if self.get(key) not in modes:
                found.append(f"{key} must be one of {modes}, got {self.get(key)!r}")
        bench_modes = self.get("bench.modes")
        if not isinstance(bench_modes, list) or not bench_modes or any(m not in modes for m in bench_modes):
            found.append(f"bench.modes must be a non-empty list drawn from {modes}, got {bench_modes!r}")
        if self.get("output.format") not in FORMATS:
            found.append(f"output.format must be one of {list(FORMATS)}, got {self.get('output.format')!r}")
        level = self.get("logging.level")
        if not isinstance(level, str) or not isinstance(logging.getLevelName(level.upper()), int):
            found.append(f"logging.level must be a logging level name, got {level!r}")
        if self.get("solver.branching") not in BRANCHINGS:
            found.append(f"solver.branching must be one of {list(BRANCHINGS)}, got {self.get('solver.branching')!r}")

        for key in ("enumeration.k", "bayes.k"):
            value = self.get(key)
            if value is not None and not _positive_int(value):
                found.append(f"{key} must be a positive integer or null, got {value!r}")
        for key in ("enumeration.timeout", "bench.timeout"):
            value = self.get(key)
            if value is not None and not _positive_number(value):
                found.append(f"{key} must be positive or null, got {value!r}")
        for key in ("bayes.scale", "bench.jobs", "solver.oracle_limit"):
            if not _positive_int(self.get(key)):
                found.append(f"{key} must be a positive integer, got {self.get(key)!r}")

        sweep = self.get("bench.k_sweep")
        if not isinstance(sweep, list) or not sweep or not all(_positive_int(k) for k in sweep):
            found.append(f"bench.k_sweep must be a non-empty list of positive integers, got {sweep!r}")
        return found

    def validate(self):
        """
        Check every setting

        Raises:
            ContractError: Listing each invalid setting
        """
        found = self.problems()
        if found:
            raise ContractError("Invalid configuration: " + "; ".join(found))

    def search_config(self, timeout: Optional[float] = None) -> SearchConfig:
        """
        Solver settings from the solver section

        Args:
            timeout: Seconds until the search gives up, None for no deadline

        Returns:
            SearchConfig with its deadline set from now
        """
        return SearchConfig.with_timeout(
            timeout,
            branching=self.get("solver.branching", "fixed"),
            seed=self.get("solver.seed"),
            oracle_verify=self.get("solver.oracle_verify"),
            oracle_limit=self.get("solver.oracle_limit"),
        )

    def save(self, output_path: str):
        """
        Save configuration to JSON file

        Args:
            output_path: Output file path
        """
        logger.info(f"Saving configuration to: {output_path}")
        with open(output_path, 'w') as f:
            json.dump(self.config, f, indent=2)
            f.write("\n")

    def to_dict(self) -> Dict:
        """Deep copy of the settings"""
        return copy.deepcopy(self.config)
