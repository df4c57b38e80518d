"""
Configuration management for the P2 signature simulator
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import (BaseModel, ConfigDict, Field, StrictBool, StrictInt, ValidationError,
                      field_validator, model_validator)

from .bits import VerificationPolicy
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

CONFIG_ENV = "P2SIM_CONFIG"
LOG_LEVEL_ENV = "P2SIM_LOG_LEVEL"

SCENARIOS = ("honest", "attack-b", "attack-c", "custom")
OUTPUT_FORMATS = ("text", "structured")


@dataclass
class ProtocolConfig:
    """Protocol parameters"""
    key_length: int = 8
    policy: str = "exact"
    forward_on_reject: bool = False


@dataclass
class RunSection:
    """Defaults for the run command"""
    scenario: str = "honest"
    seed: int = 0
    message: str = "0"
    output: str = "text"


@dataclass
class SearchConfig:
    """Defaults for the search command"""
    goal: str = "transferability"
    key_length: int = 1
    alphabet: List[str] = field(default_factory=lambda: [
        "forward", "swap-keys", "restore", "swap-partials", "flip", "flip-forward"
    ])
    victim: str = "B"
    workers: int = 1


@dataclass
class StatsConfig:
    """Defaults for the stats command"""
    strategy: str = "naive"
    trials: int = 100000
    victim: str = "B"


@dataclass
class DatabaseConfig:
    """Results store; an empty url disables recording"""
    url: str = ""
    echo: bool = False


class Config:
    """Settings file merged over built-in defaults"""

    def __init__(self, config_file: Optional[str] = None):
        config_file = config_file or os.environ.get(CONFIG_ENV)
        self.config_file = Path(config_file) if config_file else None
        self.load_config()

    @staticmethod
    def defaults() -> Dict[str, Any]:
        return {
            "protocol": asdict(ProtocolConfig()),
            "run": asdict(RunSection()),
            "search": asdict(SearchConfig()),
            "stats": asdict(StatsConfig()),
            "database": asdict(DatabaseConfig()),
        }

    def load_config(self):
        """Load configuration from file"""
        default_config = self.defaults()

        if self.config_file is not None:
            try:
                with open(self.config_file, "r") as f:
                    loaded_config = json.load(f)
            except FileNotFoundError:
                raise ConfigurationError(f"settings file {self.config_file} does not exist") from None
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"settings file {self.config_file} is not valid JSON: {e}") from None
            if not isinstance(loaded_config, dict):
                raise ConfigurationError(f"settings file {self.config_file} must hold a JSON object")
            self._merge_config(default_config, loaded_config)
            logger.debug(f"loaded settings from {self.config_file}")

        self.config = default_config

    def _merge_config(self, default: Dict[str, Any], loaded: Dict[str, Any]):
        """Recursively merge loaded config with defaults"""
        for key, value in loaded.items():
            if key not in default:
                logger.warning(f"ignoring unknown setting {key!r}")
                continue
            if isinstance(value, dict) and isinstance(default[key], dict):
                self._merge_config(default[key], value)
            else:
                default[key] = value

    def save_config(self, path: Path):
        """Write the effective settings"""
        with open(path, "w") as f:
            json.dump(self.config, f, indent=2)
            f.write("\n")

    def dumps(self) -> str:
        return json.dumps(self.config, indent=2)

    def _section(self, name: str, cls):
        try:
            return cls(**self.config[name])
        except TypeError as e:
            raise ConfigurationError(f"bad [{name}] settings: {e}") from None

    @property
    def protocol_config(self) -> ProtocolConfig:
        return self._section("protocol", ProtocolConfig)

    @property
    def run_config(self) -> RunSection:
        return self._section("run", RunSection)

    @property
    def search_config(self) -> SearchConfig:
        return self._section("search", SearchConfig)

    @property
    def stats_config(self) -> StatsConfig:
        return self._section("stats", StatsConfig)

    @property
    def database_config(self) -> DatabaseConfig:
        return self._section("database", DatabaseConfig)

    @property
    def database_url(self) -> str:
        return self.config["database"]["url"]


class CommandSettings(BaseModel):
    """Flags merged over the settings file, validated for one command.

    Integers and booleans are strict: a settings file holding "4" where a
    number belongs is rejected rather than coerced.
    """
    model_config = ConfigDict(frozen=True)

    key_length: StrictInt = 8
    policy: str = "exact"
    output: str = "text"
    forward_on_reject: StrictBool = False

    @field_validator("key_length")
    @classmethod
    def _positive_length(cls, value: int) -> int:
        if value < 1:
            raise ValueError("key length L must be at least 1")
        return value

    @field_validator("output")
    @classmethod
    def _known_output(cls, value: str) -> str:
        if value not in OUTPUT_FORMATS:
            raise ValueError(f"output must be one of {', '.join(OUTPUT_FORMATS)}")
        return value

    @field_validator("policy")
    @classmethod
    def _known_policy(cls, value: str) -> str:
        try:
            VerificationPolicy.parse(value)
        except ConfigurationError as e:
            raise ValueError(str(e)) from None
        return value

    @property
    def verification_policy(self) -> VerificationPolicy:
        return VerificationPolicy.parse(self.policy)

    @classmethod
    def build(cls, **values: Any):
        """Validate, reporting problems as ConfigurationError"""
        try:
            return cls(**{key: value for key, value in values.items() if value is not None})
        except ValidationError as e:
            reasons = "; ".join(f"{'.'.join(str(part) for part in error['loc']) or 'settings'}: {error['msg']}"
                                for error in e.errors())
            raise ConfigurationError(reasons) from None


class RunConfig(CommandSettings):
    """Validated settings of one run command"""
    scenario: str = "honest"
    strategy_file: Optional[Path] = None
    seed: StrictInt = 0
    message: str = "0"
    keys: Optional[str] = None
    masks: Optional[str] = None

    @field_validator("scenario")
    @classmethod
    def _known_scenario(cls, value: str) -> str:
        if value not in SCENARIOS:
            raise ValueError(f"scenario must be one of {', '.join(SCENARIOS)}")
        return value

    @field_validator("message")
    @classmethod
    def _message_bit(cls, value: str) -> str:
        if value not in ("0", "1", "both"):
            raise ValueError("message must be 0, 1 or both")
        return value

    @model_validator(mode="after")
    def _strategy_for_custom(self) -> "RunConfig":
        if self.scenario == "custom":
            if self.strategy_file is None:
                raise ValueError("the custom scenario needs a strategy file")
            if not self.strategy_file.is_file():
                raise ValueError(f"strategy file {self.strategy_file} does not exist")
        if (self.keys is None) != (self.masks is None):
            raise ValueError("pinned instances need both keys and masks")
        return self

    @property
    def messages(self) -> List[int]:
        return [0, 1] if self.message == "both" else [int(self.message)]

    @property
    def pinned(self) -> bool:
        return self.keys is not None


class SearchRun(CommandSettings):
    """Validated settings of one search command"""
    key_length: StrictInt = 1
    goal: str = "transferability"
    alphabet: List[str] = Field(default_factory=lambda: list(SearchConfig().alphabet))
    victim: str = "B"
    workers: StrictInt = 1

    @field_validator("workers")
    @classmethod
    def _positive_workers(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"workers must be at least 1, got {value}")
        return value


class StatsRun(CommandSettings):
    """Validated settings of one stats command"""
    strategy: str = "naive"
    victim: str = "B"
    trials: StrictInt = 100000
    seed: StrictInt = 0
    exact: StrictBool = False

    @field_validator("trials")
    @classmethod
    def _positive_trials(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"trials must be at least 1, got {value}")
        return value
