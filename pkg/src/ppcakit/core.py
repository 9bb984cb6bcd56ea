"""Evaluation outcomes, fuel accounting and the model interface."""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

DEFAULT_FUEL = 100_000


class OutOfFuel(Exception):
    """Raised inside evaluators when the step budget is spent."""


class Rejected(Exception):
    """Raised inside evaluators when a computation halts without a value."""


class Fuel:
    """A shared step budget.

    Nested applications draw from the same pool, so a single ``Fuel`` object
    is threaded through an entire evaluation.
    """

    __slots__ = ("budget", "used")

    def __init__(self, budget: int = DEFAULT_FUEL):
        self.budget = budget
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.budget:
            # report the same count however the overrun happened
            self.used = self.budget + 1
            raise OutOfFuel(self.used)

    @property
    def remaining(self) -> int:
        return max(0, self.budget - self.used)


@dataclass(frozen=True)
class Value:
    value: Any

    is_value = True

    def __str__(self):
        return f"Value({self.value!r})"


@dataclass(frozen=True)
class Undefined:
    reason: str = ""

    is_value = False


@dataclass(frozen=True)
class FuelExhausted:
    steps: int

    is_value = False


EvalOutcome = Value | Undefined | FuelExhausted


def kleene_equal(a: EvalOutcome, b: EvalOutcome) -> bool | None:
    """Kleene equality of two outcomes; ``None`` when fuel hides the answer.

    Two outcomes are equal when both are values and agree, or when both are
    definitely undefined.  An exhausted budget on either side only decides the
    question if the other side is definite and the pair cannot agree, which is
    never knowable, so it yields ``None``.
    """
    if isinstance(a, FuelExhausted) or isinstance(b, FuelExhausted):
        return None
    if isinstance(a, Value) and isinstance(b, Value):
        return a.value == b.value
    return isinstance(a, Undefined) and isinstance(b, Undefined)


def run_metered(fn, fuel: int | Fuel, *args) -> EvalOutcome:
    """Call ``fn(*args, meter)`` and fold exceptions into an outcome."""
    meter = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    try:
        return Value(fn(*args, meter))
    except OutOfFuel:
        return FuelExhausted(meter.used)
    except Rejected as exc:
        return Undefined(str(exc))


class PpcaModel(abc.ABC):
    """A parameterized partial combinatory algebra ``(A, P, .)``.

    Subclasses supply the carrier codec, the parameter codec, the two basic
    combinators and a metered application ``_apply``.
    """

    name: str = "ppca"
    K: Hashable
    S: Hashable

    def __init__(self, params: Sequence[Any]):
        params = tuple(params)
        if not params:
            raise ValueError("a ppca needs a non-empty parameter set")
        self.params = params

    @abc.abstractmethod
    def _apply(self, param, a, b, meter: Fuel):
        """Return ``a ._param b`` or raise :class:`Rejected` / :class:`OutOfFuel`."""

    def apply(self, param, a, b, fuel: int | Fuel = DEFAULT_FUEL) -> EvalOutcome:
        return run_metered(self._apply, fuel, param, a, b)

    @abc.abstractmethod
    def to_text(self, element) -> str:
        ...

    @abc.abstractmethod
    def from_text(self, text: str):
        ...

    @abc.abstractmethod
    def is_element(self, obj) -> bool:
        ...

    def param_to_text(self, param) -> str:
        return str(param)

    def param_from_text(self, text: str):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(params={len(self.params)})"


# ---------------------------------------------------------------------------
# verdicts shared by the checkers


@dataclass(frozen=True)
class Verified:
    witness: Any = None

    ok = True


@dataclass(frozen=True)
class Counterexample:
    """A failing instance.  ``point``/``realizer``/``param`` locate it."""

    point: Any = None
    realizer: Any = None
    param: Any = None
    note: str = ""

    ok = False


@dataclass(frozen=True)
class Inconclusive:
    reason: str = "fuel exhausted"

    ok = False


Verdict = Verified | Counterexample | Inconclusive


def all3(values) -> bool | None:
    """Three-valued conjunction: False wins over None wins over True."""
    unknown = False
    for v in values:
        if v is False:
            return False
        if v is None:
            unknown = True
    return None if unknown else True


def any3(values) -> bool | None:
    unknown = False
    for v in values:
        if v is True:
            return True
        if v is None:
            unknown = True
    return None if unknown else False
