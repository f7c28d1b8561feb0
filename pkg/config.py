import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from errors import ConfigError, SforgeError
from idempotents import IdempotentFamily
from rings import MatrixAlgebra, as_algebra, ring_from_descriptor
from steinberg import MUTATIONS, WordContext

FAULTS = (None, "drop-diagonal")
DEFAULT_RING = {"kind": "Mat", "size": 4, "base": {"kind": "Zmod", "m": 2}}


@dataclass(frozen=True)
class InstanceConfig:
    """One verification instance; the seed fixes every random draw"""

    ring: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_RING))
    family: Any = None
    system: str = "plain"
    scale: int = 1
    k_max: int = 6
    samples: int = 100
    seed: int = 0
    exhaustive: bool = False
    element: Optional[List[List[int]]] = None
    mutation: Optional[str] = None
    fault: Optional[str] = None
    cross_path: bool = True

    def __post_init__(self):
        if self.system not in ("plain", "homotope"):
            raise ConfigError(f"system must be 'plain' or 'homotope', got {self.system!r}")
        for name in ("scale", "k_max", "samples", "seed"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        for name in ("k_max", "samples", "seed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.mutation not in MUTATIONS:
            raise ConfigError(f"unknown mutation {self.mutation!r}; expected one of {MUTATIONS[1:]}")
        if self.fault not in FAULTS:
            raise ConfigError(f"unknown fault {self.fault!r}; expected one of {FAULTS[1:]}")
        # raises on a bad ring or family descriptor
        self.context()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InstanceConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except ConfigError:
            raise
        except SforgeError as e:
            raise ConfigError(f"invalid instance: {e}") from e
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid config value: {e}") from e

    @classmethod
    def from_file(cls, path: str) -> "InstanceConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror}") from None
        return cls.from_dict(data)

    def with_overrides(self, **overrides) -> "InstanceConfig":
        """Replace the fields whose override is not None"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **changes) if changes else self

    def with_env(self) -> "InstanceConfig":
        k_max = os.environ.get("SFORGE_KMAX")
        if k_max is None:
            return self
        try:
            value = int(k_max)
        except ValueError:
            raise ConfigError(f"SFORGE_KMAX must be an integer, got {k_max!r}") from None
        logging.info(f"Tower budget overridden by SFORGE_KMAX={value}")
        return dataclasses.replace(self, k_max=value)

    def algebra(self) -> MatrixAlgebra:
        return as_algebra(ring_from_descriptor(self.ring))

    def build_family(self) -> IdempotentFamily:
        return IdempotentFamily.from_descriptor(self.algebra(), self.family)

    def context(self, system: Optional[str] = None, level: int = 0) -> WordContext:
        return WordContext(self.build_family(), system or self.system, self.scale, level)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()
