"""Pinned constants and experiment configuration."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from importlib import resources


@dataclass(frozen=True)
class Constants:
    # m ranges over 1..ceil(A log n)
    A: float = 10.0
    # k = c1 sqrt(n/m)
    c1: float = 0.25
    # S_m^* threshold |S_m| / dual_constant
    dual_constant: int = 200
    # gap_fit accepts rank r once best volume <= fit_constant * k^-r |kX|
    fit_constant: float = 2.0
    # slack on floating certificate comparisons
    slack: float = 1e-9
    epsilon: Fraction = Fraction(1, 4)
    char_cap: int = 10**7
    dual_scan_cap: int = 10**8
    sumset_cap: int = 2 * 10**6
    enum_cap: int = 10**6
    membership_rank: int = 4
    r_max: int = 4

    def to_json(self):
        out = asdict(self)
        out["epsilon"] = str(self.epsilon)
        return out

    def with_(self, **kw) -> "Constants":
        return replace(self, **kw)


DEFAULT = Constants()


@dataclass
class ExperimentConfig:
    """Settings shared by the scripts and the ``verify-forward`` / ``calibrate`` commands."""

    name: str = "experiment"
    seed: int = 0
    ranks: list[int] = field(default_factory=lambda: [1, 2])
    vol_exponent: float = 0.75
    n_range: list[int] = field(default_factory=lambda: [100, 400])
    epsilon: Fraction = Fraction(1, 10)
    n_prime_divisor: int = 10
    instances: int = 20
    suites: list[str] = field(default_factory=lambda: ["stanley", "erdos", "halasz"])
    mc_samples: int = 200_000
    constants: Constants = field(default_factory=Constants)
    output: str | None = None

    @classmethod
    def from_dict(cls, obj):
        from .schema import validate

        validate(obj, "config")
        obj = dict(obj)
        consts = dict(obj.pop("constants", {}) or {})
        if "epsilon" in consts:
            consts["epsilon"] = Fraction(str(consts["epsilon"]))
        if "epsilon" in obj:
            obj["epsilon"] = Fraction(str(obj["epsilon"]))
        return cls(constants=Constants(**consts), **obj)

    def to_json(self):
        out = asdict(self)
        out["epsilon"] = str(self.epsilon)
        out["constants"] = self.constants.to_json()
        return out


def load_calibration() -> dict:
    """Measured calibration constants checked in with the package."""
    try:
        text = resources.files("lolab").joinpath("data/calibration.json").read_text()
    except FileNotFoundError:
        return {}
    return json.loads(text)


def calibration_constant(name: str, default: float | None = None) -> float:
    cal = load_calibration()
    entry = cal.get(name)
    if entry is None:
        if default is None:
            raise KeyError(f"calibration constant {name!r} not pinned")
        return default
    return float(entry["value"] if isinstance(entry, dict) else entry)
