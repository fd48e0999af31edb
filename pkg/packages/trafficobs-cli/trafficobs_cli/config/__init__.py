"""Configuration management."""

from trafficobs_cli.config.settings import (
    UserConfig,
    get_config_path,
    get_default_config,
    load_user_config,
    resolve_out_dir,
    save_user_config,
)

__all__ = [
    "UserConfig",
    "get_config_path",
    "load_user_config",
    "save_user_config",
    "get_default_config",
    "resolve_out_dir",
]
