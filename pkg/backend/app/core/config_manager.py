"""
Config file location and loading.

Uses platformdirs for the per-user default and python-dotenv so a project
.env can point TANDEMCAL_CONFIG at a config file.
"""

import os
from pathlib import Path
from typing import Optional, Union

from dotenv import find_dotenv, load_dotenv
from platformdirs import user_config_path

from .errors import ConfigError
from .logger import setup_logger
from .model import SystemConfig
from .toml_config import load_system_config, system_config_document, write_toml

logger = setup_logger(__name__)

# App identity for platformdirs
APP_NAME = "tandemcal"
APP_AUTHOR = False  # Don't use author subdirectory

CONFIG_ENV = "TANDEMCAL_CONFIG"
WORKERS_ENV = "TANDEMCAL_WORKERS"


def load_environment() -> None:
    """Load a .env from the working directory upwards, keeping existing env vars."""
    env_file = find_dotenv(usecwd=True)
    if env_file:
        load_dotenv(env_file, override=False)
        logger.debug(f"Loaded environment from {env_file}")


def get_user_config_dir() -> Path:
    """
    Platform-specific user config directory.

    Returns:
        - macOS: ~/Library/Application Support/tandemcal/
        - Linux: ~/.config/tandemcal/ (or $XDG_CONFIG_HOME/tandemcal/)
        - Windows: %APPDATA%\\tandemcal\\ (Roaming)
    """
    return user_config_path(appname=APP_NAME, appauthor=APP_AUTHOR, roaming=True)


def default_config_path() -> Path:
    return get_user_config_dir() / "config.toml"


def resolve_config_path(cli_path: Optional[Union[str, Path]] = None) -> Path:
    """
    Determine the config file location.

    Priority:
    1. --config PATH
    2. TANDEMCAL_CONFIG (env or .env)
    3. <user config dir>/config.toml
    """
    if cli_path:
        path = Path(cli_path).expanduser()
        logger.debug(f"Using config from --config: {path}")
        return path

    load_environment()
    env_path = os.getenv(CONFIG_ENV, "").strip()
    if env_path:
        path = Path(env_path).expanduser()
        logger.debug(f"Using config from {CONFIG_ENV}: {path}")
        return path

    path = default_config_path()
    logger.debug(f"Using default config location: {path}")
    return path


def default_workers() -> int:
    """Worker count from TANDEMCAL_WORKERS, 1 when unset."""
    load_environment()
    raw = os.getenv(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError as e:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from e
    if workers < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


class ConfigManager:
    """Resolves, loads and initializes the experiment config file."""

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Args:
            config_path: Explicit config path; resolved from env/defaults if None
        """
        self.explicit = bool(config_path)
        self.config_path = resolve_config_path(config_path)

    def exists(self) -> bool:
        return self.config_path.is_file()

    def load(self) -> SystemConfig:
        """
        Load the resolved config.

        An explicitly named file must exist; a missing file at the implicit
        locations falls back to the built-in defaults.
        """
        if self.exists():
            return load_system_config(self.config_path)
        if self.explicit or os.getenv(CONFIG_ENV, "").strip():
            raise ConfigError(f"config file not found: {self.config_path}")
        logger.info(f"No config at {self.config_path}, using defaults")
        return SystemConfig()

    def write_default(self, force: bool = False) -> Path:
        """
        Write a commented default config.

        Raises:
            ConfigError: File exists and force is False
        """
        if self.exists() and not force:
            raise ConfigError(
                f"{self.config_path} already exists (use --force to overwrite)"
            )
        write_toml(self.config_path, system_config_document(SystemConfig()))
        logger.info(f"Wrote default config to {self.config_path}")
        return self.config_path
