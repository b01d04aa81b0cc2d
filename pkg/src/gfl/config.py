"""Flat ``key = value`` config files and the training configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


def read_key_values(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


@dataclass
class TrainConfig:
    """Training protocol. Defaults follow the published setup where it is stated.

    ``batch_size``, the Adam betas/eps and the loss are not published; the
    values here are our own defaults.
    """

    dataset: str | None = None
    synthetic: str | None = None          # comma-separated family names
    synthetic_n_per_class: int = 100
    synthetic_size_min: int = 10
    synthetic_size_max: int = 30
    synthetic_seed: int = 0
    readout: str = "gfl"
    features: str = "degree"
    epochs: int = 100
    lr: float = 0.01
    lr_halving_period: int = 20
    weight_decay: float = 1e-6
    batch_size: int = 64
    folds: int = 10
    seed: int = 0
    hidden: int = 64
    n_elements: int = 100
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    workers: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.lr <= 0:
            raise ConfigError("lr must be > 0")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if (self.dataset is None) == (self.synthetic is None):
            raise ConfigError("set exactly one of 'dataset' or 'synthetic'")

    @classmethod
    def from_file(cls, path, **overrides) -> "TrainConfig":
        kv = read_key_values(path)
        fields = {f.name: f for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in kv.items():
            if key not in fields:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(fields[key], raw)
        if values.get("dataset"):
            ds = Path(values["dataset"])
            if not ds.is_absolute():
                values["dataset"] = str((Path(path).parent / ds).resolve())
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _coerce(field: dataclasses.Field, raw: str):
    kind = field.type if isinstance(field.type, str) else getattr(field.type, "__name__", str(field.type))
    try:
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{field.name}: cannot parse {raw!r}") from None
    return raw or None
