"""Mixed-type search spaces and their encoding into a bounded real box.

Every parameter maps to one real coordinate. Continuous parameters keep
their value (or its base-10 logarithm), integers are cast to float and
categorical labels become the float index of the label. Decoding rounds
integer and categorical coordinates to the nearest index and clamps, so
any real vector decodes to a valid assignment.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np


class DomainError(ValueError):
    """Raised for invalid parameter declarations or out-of-domain values."""


def round_half_away(x):
    """Round to the nearest integer, ties away from zero (numpy's round is half-even)."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


@dataclass(frozen=True)
class Continuous:
    name: str
    lo: float
    hi: float
    log: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise DomainError(f"{self.name}: continuous bounds need lo < hi, got [{self.lo}, {self.hi}]")
        if self.log and self.lo <= 0:
            raise DomainError(f"{self.name}: log-scale parameter needs lo > 0")

    @property
    def bounds(self) -> tuple[float, float]:
        if self.log:
            return math.log10(self.lo), math.log10(self.hi)
        return float(self.lo), float(self.hi)

    def encode(self, value) -> float:
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise DomainError(f"{self.name}: expected a number, got {value!r}")
        value = float(value)
        if not self.lo <= value <= self.hi:
            raise DomainError(f"{self.name}: {value} outside [{self.lo}, {self.hi}]")
        return math.log10(value) if self.log else value

    def decode(self, coord: float) -> float:
        lo, hi = self.bounds
        c = min(max(float(coord), lo), hi)
        if self.log:
            return min(max(10.0 ** c, self.lo), self.hi)
        return c

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": "continuous", "lo": self.lo, "hi": self.hi, "log": self.log}


@dataclass(frozen=True)
class Integer:
    name: str
    lo: int
    hi: int

    def __post_init__(self):
        if int(self.lo) != self.lo or int(self.hi) != self.hi:
            raise DomainError(f"{self.name}: integer bounds must be integral")
        if self.lo > self.hi:
            raise DomainError(f"{self.name}: integer bounds need lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def bounds(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)

    def encode(self, value) -> float:
        if isinstance(value, bool) or not isinstance(value, numbers.Real) or value != int(value):
            raise DomainError(f"{self.name}: expected an integer, got {value!r}")
        if not self.lo <= value <= self.hi:
            raise DomainError(f"{self.name}: {value} outside [{self.lo}, {self.hi}]")
        return float(value)

    def decode(self, coord: float) -> int:
        return int(min(max(round_half_away(coord), self.lo), self.hi))

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": "integer", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Categorical:
    name: str
    choices: tuple

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(self.choices))
        if not self.choices:
            raise DomainError(f"{self.name}: categorical needs at least one choice")
        if len(set(self.choices)) != len(self.choices):
            raise DomainError(f"{self.name}: duplicate categorical labels")

    @property
    def bounds(self) -> tuple[float, float]:
        return 0.0, float(len(self.choices) - 1)

    def encode(self, value) -> float:
        try:
            return float(self.choices.index(value))
        except ValueError:
            raise DomainError(f"{self.name}: {value!r} not in {list(self.choices)}") from None

    def decode(self, coord: float):
        idx = int(min(max(round_half_away(coord), 0), len(self.choices) - 1))
        return self.choices[idx]

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": "categorical", "choices": list(self.choices)}


ParamSpec = Continuous | Integer | Categorical


@dataclass(frozen=True)
class SearchSpace:
    """Ordered collection of parameters; declaration order fixes the encoding."""

    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise DomainError("parameter names must be unique")

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def lower(self) -> np.ndarray:
        return np.array([p.bounds[0] for p in self.params], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([p.bounds[1] for p in self.params], dtype=float)

    def encode(self, assignment: Mapping[str, Any]) -> np.ndarray:
        unknown = set(assignment) - set(self.names)
        if unknown:
            raise DomainError(f"unknown parameter(s): {sorted(unknown)}")
        missing = [n for n in self.names if n not in assignment]
        if missing:
            raise DomainError(f"missing parameter(s): {missing}")
        return np.array([p.encode(assignment[p.name]) for p in self.params], dtype=float)

    def decode(self, x) -> dict[str, Any]:
        x = self._check_vector(x)
        return {p.name: p.decode(c) for p, c in zip(self.params, x)}

    def clamp(self, x) -> np.ndarray:
        x = self._check_vector(x)
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def sample_uniform(self, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(self.dim)
        for j, p in enumerate(self.params):
            lo, hi = p.bounds
            if isinstance(p, Continuous):
                out[j] = rng.uniform(lo, hi)
            else:
                out[j] = float(rng.integers(int(lo), int(hi), endpoint=True))
        return out

    def contains(self, x, atol: float = 0.0) -> bool:
        x = self._check_vector(x)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def _check_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dim:
            raise DomainError(f"vector of length {x.shape[0]} for a {self.dim}-dimensional space")
        return x

    def to_list(self) -> list[dict]:
        return [p.to_dict() for p in self.params]

    @classmethod
    def from_list(cls, decl: Sequence[Mapping[str, Any]]) -> "SearchSpace":
        return cls(tuple(param_from_dict(d) for d in decl))


_KIND_KEYS = {
    "continuous": {"name", "kind", "lo", "hi", "log"},
    "integer": {"name", "kind", "lo", "hi"},
    "categorical": {"name", "kind", "choices"},
}


def param_from_dict(d: Mapping[str, Any]) -> ParamSpec:
    if not isinstance(d, Mapping):
        raise DomainError(f"parameter declaration must be an object, got {d!r}")
    kind = d.get("kind")
    if kind not in _KIND_KEYS:
        raise DomainError(f"parameter kind must be one of {sorted(_KIND_KEYS)}, got {kind!r}")
    extra = set(d) - _KIND_KEYS[kind]
    if extra:
        raise DomainError(f"unknown key(s) {sorted(extra)} for {kind} parameter")
    name = d.get("name")
    if not isinstance(name, str) or not name:
        raise DomainError("parameter name must be a non-empty string")
    try:
        if kind == "continuous":
            return Continuous(name, float(d["lo"]), float(d["hi"]), bool(d.get("log", False)))
        if kind == "integer":
            return Integer(name, d["lo"], d["hi"])
        return Categorical(name, tuple(d["choices"]))
    except KeyError as exc:
        raise DomainError(f"{name}: missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise DomainError(f"{name}: {exc}") from None
