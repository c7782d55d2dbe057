"""Engine configuration: every tunable knob in one validated JSON document."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .graph import MEASURES
from .ingest import DEFAULT_ATTRIBUTE_NAMES, RatingScale
from .profile import COMPARISONS
from .recommend import TRAVERSALS
from .similarity import AttributeWeights, HybridWeights

# keys a config file must spell out; everything else falls back to defaults
REQUIRED_KEYS = ("attribute_weights",)


@dataclass(frozen=True)
class EngineConfig:
    rating_scale: RatingScale = RatingScale()
    attributes: tuple[str, ...] = DEFAULT_ATTRIBUTE_NAMES
    attribute_weights: tuple[float, ...] = (1.0, 1.0, 1.0)
    hybrid_weights: HybridWeights = HybridWeights()
    liking_threshold: float = 4.0
    threshold: float = 0.5
    influence_measure: str = "degree"
    coverage_budget: float = 0.8
    max_results: int | None = None
    traversal: str = "scan"
    profile_comparison: str = "mass"
    agreement_attribute: int | None = None  # None: the last (overall) attribute
    min_agreements: int = 1
    neighborhood_size: int = 20
    holdout_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "attribute_weights", tuple(float(w) for w in self.attribute_weights))
        k = len(self.attributes)
        if k < 1:
            raise ConfigError("attributes: at least one attribute is required")
        if len(self.attribute_weights) != k:
            raise ConfigError(
                f"attribute_weights: {len(self.attribute_weights)} weights for {k} attributes"
            )
        AttributeWeights(self.attribute_weights)
        if not self.threshold >= 0:
            raise ConfigError("threshold: must be non-negative")
        if not 0 < self.coverage_budget <= 1:
            raise ConfigError("coverage_budget: must lie in (0, 1]")
        if self.influence_measure not in MEASURES:
            raise ConfigError(f"influence_measure: expected one of {MEASURES}")
        if self.traversal not in TRAVERSALS:
            raise ConfigError(f"traversal: expected one of {TRAVERSALS}")
        if self.profile_comparison not in COMPARISONS:
            raise ConfigError(f"profile_comparison: expected one of {COMPARISONS}")
        if self.max_results is not None and self.max_results < 1:
            raise ConfigError("max_results: must be a positive integer or null")
        if self.agreement_attribute is not None and not 1 <= self.agreement_attribute <= k:
            raise ConfigError(f"agreement_attribute: must lie in [1..{k}]")
        if self.min_agreements < 1:
            raise ConfigError("min_agreements: must be a positive integer")
        if self.neighborhood_size < 1:
            raise ConfigError("neighborhood_size: must be a positive integer")
        if not 0 < self.holdout_fraction < 1:
            raise ConfigError("holdout_fraction: must lie in (0, 1)")
        if not self.rating_scale.low <= self.liking_threshold <= self.rating_scale.high:
            raise ConfigError("liking_threshold: must lie within the rating scale")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def overall_attribute(self) -> int:
        return self.n_attributes

    @property
    def agreement(self) -> int:
        return self.agreement_attribute or self.overall_attribute

    @property
    def weights(self) -> AttributeWeights:
        return AttributeWeights(self.attribute_weights)

    def to_dict(self) -> dict:
        d = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, RatingScale):
                v = {"low": v.low, "high": v.high, "integral": v.integral}
            elif isinstance(v, HybridWeights):
                v = {"cf": v.cf, "semantic": v.semantic}
            elif isinstance(v, tuple):
                v = list(v)
            d[f.name] = v
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def replace(self, **overrides) -> "EngineConfig":
        """Copy with the non-None overrides applied."""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def from_dict(cls, data: dict, require: tuple[str, ...] = REQUIRED_KEYS) -> "EngineConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        missing = [k for k in require if k not in data]
        if missing:
            raise ConfigError(f"missing config key(s): {', '.join(missing)}")
        kw = dict(data)
        try:
            if "rating_scale" in kw:
                rs = kw["rating_scale"]
                if isinstance(rs, (list, tuple)):
                    if len(rs) != 2:
                        raise ConfigError("rating_scale: expected [low, high]")
                    rs = {"low": rs[0], "high": rs[1]}
                if not isinstance(rs, dict):
                    raise ConfigError("rating_scale: expected [low, high] or an object")
                low, high = rs.get("low", 1), rs.get("high", 5)
                integral = rs.get(
                    "integral", float(low).is_integer() and float(high).is_integer()
                )
                kw["rating_scale"] = RatingScale(low, high, bool(integral))
            if "hybrid_weights" in kw:
                hw = kw["hybrid_weights"]
                if not isinstance(hw, dict) or set(hw) - {"cf", "semantic"}:
                    raise ConfigError('hybrid_weights: expected {"cf": w, "semantic": w}')
                kw["hybrid_weights"] = HybridWeights(hw.get("cf", 0.5), hw.get("semantic", 0.5))
            if "attributes" in kw and "attribute_weights" not in kw:
                kw["attribute_weights"] = [1.0] * len(kw["attributes"])
            if "attribute_weights" in kw and "attributes" not in kw:
                n = len(kw["attribute_weights"])
                names = list(DEFAULT_ATTRIBUTE_NAMES[:n])
                kw["attributes"] = names + [f"attr{a}" for a in range(len(names) + 1, n + 1)]
            return cls(**kw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from None


def load_config(path: str | os.PathLike) -> EngineConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        return EngineConfig.from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
