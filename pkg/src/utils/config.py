"""
Run configuration for the command-line front end.

Values are layered: built-in defaults, then a key=value config file, then
command-line flags. validate() checks the combined result against the
preconditions of the command it will be dispatched to.
"""

import os
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Union

from .errors import ConfigError

COMMANDS = ('bounds', 'products', 'spectrum', 'variational', 'simulate', 'correlation', 'report')
FORMATS = ('json', 'csv')
DEMOS = ('uniform-factor', 'telescoping', 'hard-sphere-tail')
THREADS_ENV = 'KACGAP_THREADS'


@dataclass
class RunConfig:
    """Everything a single CLI invocation needs."""
    command: str = 'bounds'
    N: List[int] = field(default_factory=lambda: [10])
    gamma: float = 0.5
    E: float = 1.0
    n0: Union[int, str] = 10
    seed: int = 0
    replicas: int = 1000
    degree: int = 4
    basis_size: int = 16
    horizon: float = 4.0
    samples: int = 100_000
    output_path: Optional[str] = None
    format: str = 'json'
    trajectory_path: Optional[str] = None
    demo: Optional[str] = None
    order: int = 1
    m: int = 1
    threads: int = 1

    def validate(self) -> 'RunConfig':
        """
        Check the configuration for the selected command.

        Returns:
            self, so calls can be chained

        Raises:
            ConfigError: describing the first offending field
        """
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        if self.format == 'csv' and self.command != 'simulate':
            raise ConfigError("csv output is only available for simulate trajectories")
        if not self.N:
            raise ConfigError("at least one N is required")
        if any(n < 2 for n in self.N):
            raise ConfigError("N must be >= 2")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.E <= 0:
            raise ConfigError("E must be positive")
        if self.n0 != 'auto' and (not isinstance(self.n0, int) or self.n0 < 3):
            raise ConfigError("n0 must be an integer >= 3 or 'auto'")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

        if self.command == 'spectrum':
            if self.gamma != 0.0:
                raise ConfigError("exact spectra exist only for gamma = 0")
            if any(not 3 <= n <= 8 for n in self.N):
                raise ConfigError("spectrum requires 3 <= N <= 8")
            if self.degree % 2 or not 4 <= self.degree <= 8:
                raise ConfigError("spectrum degree must be 4, 6 or 8")
        if self.command in ('variational', 'report'):
            if self.degree % 2 or not 4 <= self.degree <= 12:
                raise ConfigError("variational degree must be even and in [4, 12]")
            if not 4 <= self.basis_size <= 64:
                raise ConfigError("basis_size must lie in [4, 64]")
        if self.command in ('simulate', 'report'):
            if self.replicas < 100:
                raise ConfigError("at least 100 replicas are required")
            if self.horizon <= 0:
                raise ConfigError("horizon must be positive")
        if self.command == 'products' and self.demo is not None and self.demo not in DEMOS:
            raise ConfigError(f"demo must be one of {', '.join(DEMOS)}")
        if self.command == 'correlation':
            if self.order not in (1, 2):
                raise ConfigError("order must be 1 or 2")
            if self.m < 1 or any(2 * self.m > n for n in self.N):
                raise ConfigError("m must satisfy 1 <= m <= N/2")
        return self

    def to_dict(self) -> Dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def threads_from_env(environ: Optional[Dict[str, str]] = None) -> int:
    """Worker count from KACGAP_THREADS, defaulting to the CPU count."""
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV)
    if raw is None or raw.strip() == '':
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'")
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return value


def parse_config_text(text: str) -> Dict[str, str]:
    """
    Parse key=value lines.

    Blank lines and lines starting with '#' are skipped.

    Raises:
        ConfigError: for a line without '=' or an unknown key
    """
    known = {f.name for f in fields(RunConfig)}
    values: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        values[key] = value
    return values


def _coerce(key: str, raw: str):
    """Convert a config-file string to the field's type."""
    try:
        if key == 'N':
            return [int(part) for part in raw.replace(',', ' ').split()]
        if key == 'n0':
            return raw if raw == 'auto' else int(raw)
        if key in ('gamma', 'E', 'horizon'):
            return float(raw)
        if key in ('seed', 'replicas', 'degree', 'basis_size', 'samples', 'order', 'm', 'threads'):
            return int(raw)
    except ValueError:
        raise ConfigError(f"invalid value '{raw}' for {key}")
    return raw or None


def build_config(file_values: Optional[Dict[str, str]] = None,
                 overrides: Optional[Dict] = None,
                 environ: Optional[Dict[str, str]] = None) -> RunConfig:
    """
    Layer defaults, file values and flag overrides into a validated RunConfig.

    Args:
        file_values: Raw strings from parse_config_text
        overrides: Already-typed values from the command line; None entries are ignored
        environ: Environment used for KACGAP_THREADS (defaults to os.environ)

    Returns:
        Validated RunConfig
    """
    config = RunConfig(threads=threads_from_env(environ))
    if file_values:
        config = replace(config, **{k: _coerce(k, v) for k, v in file_values.items()})
    if overrides:
        config = replace(config, **{k: v for k, v in overrides.items() if v is not None})
    return config.validate()
