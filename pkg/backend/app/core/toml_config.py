"""
Experiment config files.

A config is a flat list of `key = value` lines with `#` comments, read and
written with tomlkit. Keys are exactly the SystemConfig field names.
"""

import re
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict

import tomlkit
from tomlkit.exceptions import TOMLKitError

from .errors import ConfigError
from .logger import setup_logger
from .model import SystemConfig

logger = setup_logger(__name__)

INTEGER_KEYS = frozenset(
    {
        "num_aps",
        "num_users",
        "antennas_ap",
        "digital_chains_ap",
        "antennas_mu",
        "digital_chains_mu",
        "num_paths",
        "num_trials",
    }
)

# key -> comment written above it by `config init`
KEY_COMMENTS: Dict[str, str] = {
    "num_aps": "cooperating access points (K)",
    "num_users": "single-stream users served (U)",
    "antennas_ap": "antennas per AP (M_ap)",
    "digital_chains_ap": "digital chains per AP (N_ap <= M_ap)",
    "antennas_mu": "antennas per user (M_mu)",
    "digital_chains_mu": "digital chains per user (N_mu <= M_mu)",
    "num_paths": "propagation paths per channel (L)",
    "mismatch_sigma_mag": "log-std of chain magnitude mismatch",
    "mismatch_sigma_phase": "half-width of uniform chain phase mismatch, radians",
    "noise_variance": "receiver noise variance",
    "tx_power": "total DL transmit power shared by all users",
    "master_seed": "64-bit seed; quote it when it is >= 2**63",
    "num_trials": "Monte Carlo trials per sweep value",
    "rate_noise_floor": "rate evaluation uses max(noise_variance, floor * tx_power)",
}

# bare decimals TOML rejects: `key = .01`, `key = -.5`, `key = 2.`
_LEADING_DOT = re.compile(r"^(\s*\w+\s*=\s*[+-]?)\.(?=\d)", re.MULTILINE)
_TRAILING_DOT = re.compile(r"^(\s*\w+\s*=\s*[+-]?\d+)\.(?=\s*(?:#|$))", re.MULTILINE)


def normalize_bare_decimals(text: str) -> str:
    """Rewrite `.5` as `0.5` and `2.` as `2.0` on key = value lines."""
    text = _LEADING_DOT.sub(r"\g<1>0.", text)
    return _TRAILING_DOT.sub(r"\g<1>.0", text)


def read_toml(toml_path: Path) -> Dict[str, Any]:
    """
    Read a config file into plain Python values.

    Raises:
        ConfigError: File missing or not valid TOML
    """
    if not toml_path.exists():
        raise ConfigError(f"config file not found: {toml_path}")
    try:
        with open(toml_path, "r", encoding="utf-8") as f:
            document = tomlkit.parse(normalize_bare_decimals(f.read()))
    except (TOMLKitError, UnicodeDecodeError) as e:
        raise ConfigError(f"{toml_path}: not a valid config file: {e}") from e
    logger.debug(f"Read config from {toml_path}")
    return document.unwrap()


def write_toml(toml_path: Path, document: tomlkit.TOMLDocument) -> None:
    """Write a tomlkit document, creating the parent directory."""
    toml_path.parent.mkdir(parents=True, exist_ok=True)
    with open(toml_path, "w", encoding="utf-8", newline="\n") as f:
        tomlkit.dump(document, f)
    logger.debug(f"Wrote {toml_path}")


def _parse_seed(value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"master_seed must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().isdigit():
        return int(value.strip())
    raise ConfigError(
        f"master_seed must be an integer or a quoted integer, got {value!r}"
    )


def parse_system_config(values: Dict[str, Any]) -> SystemConfig:
    """
    Validate a flat key/value mapping and build a SystemConfig.

    Missing keys keep their defaults.

    Raises:
        ConfigError: Unknown key, nested value, wrong type or invalid value
    """
    known = {f.name for f in fields(SystemConfig)}
    changes: Dict[str, Any] = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {key!r}")
        if isinstance(value, (dict, list)):
            raise ConfigError(f"{key} must be a plain value, not a table or array")
        if key == "master_seed":
            changes[key] = _parse_seed(value)
        elif key in INTEGER_KEYS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
            changes[key] = value
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            changes[key] = float(value)
    return SystemConfig(**changes)


def load_system_config(toml_path: Path) -> SystemConfig:
    """Read and validate an experiment config file."""
    return parse_system_config(read_toml(toml_path))


def system_config_document(config: SystemConfig) -> tomlkit.TOMLDocument:
    """Commented flat document for a SystemConfig."""
    document = tomlkit.document()
    document.add(tomlkit.comment("tandemcal experiment config"))
    document.add(tomlkit.nl())
    for name, value in config.as_dict().items():
        document.add(tomlkit.comment(KEY_COMMENTS[name]))
        if name == "master_seed" and value >= 2**63:
            value = str(value)
        document.add(name, value)
    return document
