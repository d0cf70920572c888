from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .overlap import OverlapParams


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


@dataclass(frozen=True)
class AssemblyConfig:
    k: int = 25
    e1: float = 0.02
    e2: int = 2
    d: int = 500
    w: int = 12
    max_occ: int = 64
    max_mismatch: int = 2
    max_mismatch_part: int = 1
    max_paths: int = 64
    min_contig_len: int | None = None  # None means 2 * k
    threads: int = 1
    rng_seed: int = 0
    shuffle_seeds: bool = False
    correct_errors: bool = True
    correction_k: int = 21

    def __post_init__(self):
        positive = ("k", "d", "w", "max_occ", "max_paths", "threads")
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("e2", "max_mismatch", "max_mismatch_part"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if not 0 <= self.e1 < 0.5:
            raise ConfigError("e1 must lie in [0, 0.5)")
        if not 1 <= self.w <= 32:
            raise ConfigError("w must lie in 1..32")
        if self.correction_k < 2:
            raise ConfigError("correction_k must be at least 2")
        if self.min_contig_len is not None and self.min_contig_len < 0:
            raise ConfigError("min_contig_len must be non-negative")

    @property
    def overlap(self) -> OverlapParams:
        return OverlapParams(self.k, self.e1, self.e2)

    @property
    def min_len(self) -> int:
        return 2 * self.k if self.min_contig_len is None else self.min_contig_len

    def as_dict(self) -> dict:
        out = asdict(self)
        out["min_contig_len"] = self.min_len
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AssemblyConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)
