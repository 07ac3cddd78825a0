"""Configuration settings for training and evaluation."""
import os
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .ansatz import AnsatzShape
from .errors import ConfigurationError
from .sampling import NegativeMode, NegativeSpec

# Flag spellings accepted in config files, mapped to field names
FLAG_ALIASES = {
    "qubits": "n_qubits",
    "lr": "learning_rate",
    "validate": "validate_epochs",
}


class TrainingConfig(BaseSettings):
    """Training settings loaded from arguments, then QKGE_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="QKGE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        frozen=True,
    )

    # Circuits
    n_qubits: int = Field(2, ge=1, le=24)
    entity_layers: int = Field(2, ge=1)
    relation_layers: int = Field(2, ge=1)

    # Optimizer
    learning_rate: float = Field(0.01, gt=0)
    epochs: int = Field(10, ge=1)
    batch_size: int = Field(128, ge=1)
    adam_beta1: float = Field(0.9, ge=0, lt=1)
    adam_beta2: float = Field(0.999, ge=0, lt=1)
    adam_epsilon: float = Field(1e-8, gt=0)

    # Negatives
    negatives: int = Field(1, ge=1)
    negative_mode: NegativeMode = NegativeMode.SUPERPOSED
    filter_negatives: bool = False

    seed: int = Field(42, ge=0, lt=2**64)
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    validate_epochs: bool = True

    @property
    def entity_shape(self) -> AnsatzShape:
        return AnsatzShape(self.n_qubits, self.entity_layers)

    @property
    def relation_shape(self) -> AnsatzShape:
        return AnsatzShape(self.n_qubits, self.relation_layers)

    @property
    def negative_spec(self) -> NegativeSpec:
        return NegativeSpec(
            k=self.negatives,
            seed=self.seed,
            mode=self.negative_mode,
            filter_known=self.filter_negatives,
        )


def _field_name(key: str) -> str | None:
    name = key.strip().lstrip("-").lower().replace("-", "_")
    return FLAG_ALIASES.get(name, name)


def read_config_file(path: Path) -> dict[str, Any]:
    """key=value lines, keys spelled like the long command-line flags."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")
    values: dict[str, Any] = {}
    for key, value in dotenv_values(path).items():
        name = _field_name(key)
        if name not in TrainingConfig.model_fields:
            raise ConfigurationError(f"Unknown setting '{key}' in {path}")
        values[name] = value
    return values


def load_config(config_file: Path | None = None, **overrides: Any) -> TrainingConfig:
    """Build a config; explicit overrides beat the config file, which beats the environment."""
    values: dict[str, Any] = {}
    if config_file is not None:
        values.update(read_config_file(config_file))
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return TrainingConfig(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigurationError(f"Invalid configuration: {problems}") from e
