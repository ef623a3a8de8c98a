"""Run configuration and its TOML loader."""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

from .community import ConfigError
from .dp import PrivacyBudget

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

METHODS = ("privgraph", "tmf")
NORM_SUB_SCOPES = ("global", "per-community")
INTER_SAMPLING = ("bernoulli", "exact-count")


@dataclass(frozen=True)
class SynthesisConfig:
    method: str = "privgraph"
    eps_total: float = 2.0
    budget_split: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    N: int = 20
    t: float = 1.0
    seed: int | None = None
    norm_sub_scope: str = "global"
    inter_sampling: str = "bernoulli"
    tmf_count_fraction: float = 0.1
    tmf_max_cells: int = 10**9
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "budget_split", tuple(float(f) for f in self.budget_split))
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.eps_total > 0) or math.isnan(self.eps_total):
            raise ConfigError(f"eps_total must be positive, got {self.eps_total!r}")
        split = self.budget_split
        if len(split) != 3 or any(not (f > 0) for f in split):
            raise ConfigError("budget_split needs three positive fractions")
        if abs(sum(split) - 1.0) > 1e-9:
            raise ConfigError(f"budget_split sums to {sum(split)!r}, expected 1")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N!r}")
        if not (self.t > 0):
            raise ConfigError(f"t must be positive, got {self.t!r}")
        if self.norm_sub_scope not in NORM_SUB_SCOPES:
            raise ConfigError(f"norm_sub_scope must be one of {NORM_SUB_SCOPES}")
        if self.inter_sampling not in INTER_SAMPLING:
            raise ConfigError(f"inter_sampling must be one of {INTER_SAMPLING}")
        if not (0 < self.tmf_count_fraction < 1):
            raise ConfigError("tmf_count_fraction must lie in (0, 1)")

    def budget(self) -> PrivacyBudget:
        return PrivacyBudget.split(self.eps_total, self.budget_split)

    def with_overrides(self, **kw: Any) -> "SynthesisConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        d["budget_split"] = list(self.budget_split)
        return d


_FIELD_NAMES = {f.name for f in fields(SynthesisConfig)} - {"extra"}


def load_config(path) -> dict:
    """Read a TOML file into override keywords for :class:`SynthesisConfig`.

    Keys may sit at top level or under a ``[synthesis]`` table; dashes in
    keys are accepted for underscores.
    """
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    doc = doc.get("synthesis", doc)
    out = {}
    for key, value in doc.items():
        name = key.replace("-", "_")
        if name not in _FIELD_NAMES:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        if name == "budget_split":
            value = tuple(value)
        out[name] = value
    return out
