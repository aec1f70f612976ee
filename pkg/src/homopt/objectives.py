"""Analytic benchmark objectives and a bridge to external evaluator commands."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from ._stdio import ProtocolError, exchange
from .space import Continuous, DomainError, SearchSpace


class ObjectiveError(RuntimeError):
    """An evaluation failed; the driver records it with a sentinel loss."""


def gramacy_lee(x: float) -> float:
    """Gramacy & Lee (2012) test function on [0.5, 2.5]."""
    if not 0.5 <= x <= 2.5:
        raise DomainError(f"x={x} outside [0.5, 2.5]")
    return math.sin(10 * math.pi * x) / (2 * x) + (x - 1) ** 4


def modified_griewank(x: float, y: float) -> float:
    """2-D Griewank variant shifted so the global minimum 0 sits at (5, -3)."""
    if not (-20 <= x <= 20 and -20 <= y <= 20):
        raise DomainError(f"({x}, {y}) outside [-20, 20]^2")
    dx, dy = x - 5, y + 3
    return (dx * dx + dy * dy) / 40 - math.cos(dx) * math.cos(dy / math.sqrt(2)) + 1


@dataclass(frozen=True)
class Objective:
    name: str
    space: SearchSpace
    fn: Callable[[Mapping[str, Any]], float]

    def __call__(self, assignment: Mapping[str, Any]) -> float:
        return self.fn(assignment)


GRAMACY_LEE = Objective(
    "gramacy_lee",
    SearchSpace((Continuous("x", 0.5, 2.5),)),
    lambda a: gramacy_lee(a["x"]),
)

MODIFIED_GRIEWANK = Objective(
    "griewank_modified",
    SearchSpace((Continuous("x", -20.0, 20.0), Continuous("y", -20.0, 20.0))),
    lambda a: modified_griewank(a["x"], a["y"]),
)

BUILTINS = {o.name: o for o in (GRAMACY_LEE, MODIFIED_GRIEWANK)}


def builtin(name: str) -> Objective:
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin objective {name!r}; expected one of {sorted(BUILTINS)}") from None


def external_objective(command, space: SearchSpace, timeout: float = 300.0, name: str = "external") -> Objective:
    """Objective evaluated by spawning ``command`` once per assignment.

    The child reads ``{"params": {...}}`` from stdin and prints ``{"loss": <number>}``.
    Any failure raises :class:`ObjectiveError`.
    """

    def evaluate(assignment):
        try:
            reply = exchange(command, {"params": dict(assignment)}, timeout)
        except ProtocolError as exc:
            raise ObjectiveError(str(exc)) from exc
        loss = reply.get("loss")
        if isinstance(loss, bool) or not isinstance(loss, (int, float)):
            raise ObjectiveError(f"reply lacks a numeric 'loss': {reply!r}")
        return float(loss)

    return Objective(name, space, evaluate)
