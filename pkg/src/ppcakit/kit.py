"""The standard realizer library, compiled per model.

Every entry is a closed expression that may mention other entries through
placeholder variables ``kit:NAME``.  A :class:`Kit` evaluates entries in
dependency order, replacing placeholders by already computed values, and
checks that each result is uniform on the model's parameter sample.
"""

from __future__ import annotations

from dataclasses import dataclass


from . import machine as M
from .core import DEFAULT_FUEL, EvalOutcome, Fuel, FuelExhausted, PpcaModel, Undefined, Value
from .terms import K, S, CombExpr, Const, Var, ap, eval_at, free_vars, lam, substitute, ucode


def ref(name: str) -> Var:
    return Var("kit:" + name)


_ID = lam("x", "x")
_TRUE = lam("x y", "x")
_FALSE = lam("x y", "y")

DEFINITIONS: dict[str, CombExpr] = {
    "id": _ID,
    "pair": lam("x y z", ap("z", "x", "y")),
    "fst": lam("z", ap("z", _TRUE)),
    "snd": lam("z", ap("z", _FALSE)),
    "if": _ID,
    "true": _TRUE,
    "false": _FALSE,
    "zero": ap(S, K, K),
    "succ": lam("x", ap(ref("pair"), ref("false"), "x")),
    "iszero": ref("fst"),
    "pred": lam("x", ap(ref("if"), ap(ref("iszero"), "x"), ref("zero"), ap(ref("snd"), "x"))),
    "W": lam("x y", ap("y", ap("x", "x", "y"))),
    "Y": ap(ref("W"), ref("W")),
    "X": lam("x y z", ap("y", ap("x", "x", "y"), "z")),
    "Z": ap(ref("X"), ref("X")),
    "R": lam(
        "r x f m",
        ap(
            ref("if"),
            ap(ref("iszero"), "m"),
            ap(K, "x"),
            lam("y", ap("f", ap(ref("pred"), "m"), ap("r", "x", "f", ap(ref("pred"), "m"), ref("id")))),
        ),
    ),
    "primrec": lam("x f m", ap(ref("Z"), ref("R"), "x", "f", "m", ref("id"))),
    # Least-witness search.  Both branches of the conditional are abstractions
    # so that the recursive call only happens once the branch is chosen.
    "search_step": lam(
        "s f n",
        ap(
            ref("if"),
            ap(ref("iszero"), ap("f", "n")),
            lam("y", ap("s", "f", ap(ref("succ"), "n"))),
            ap(K, "n"),
            ref("id"),
        ),
    ),
    "search": lam("f", ap(ref("Z"), ref("search_step"), "f", ref("zero"))),
    "markov": lam("f r", ap(ref("search"), "f")),
    # compile-only showcase terms
    "brouwer": ap(
        ref("Z"),
        lam(
            "s g",
            ap(
                "g",
                ap(
                    ref("pair"),
                    lam("k", ap(ref("fst"), ap("s", "g"), "k")),
                    lam("k", ap(ref("snd"), ap("s", "g"), "k")),
                ),
            ),
        ),
    ),
    "selfapp_id": lam("m", "m"),
}

SHOWCASE = ("brouwer", "selfapp_id")
CORE_NAMES = tuple(n for n in DEFINITIONS if n not in SHOWCASE)


def _deps(name: str) -> list[str]:
    return sorted(v[4:] for v in free_vars(DEFINITIONS[name]) if v.startswith("kit:"))


def closed_definition(name: str) -> CombExpr:
    """The definition with every placeholder inlined (model independent)."""
    seen: dict[str, CombExpr] = {}

    def go(n):
        if n not in seen:
            seen[n] = substitute(DEFINITIONS[n], {"kit:" + d: go(d) for d in _deps(n)})
        return seen[n]

    return go(name)


def numeral_expr(n: int) -> CombExpr:
    """Closed expression whose value is the Curry numeral of ``n``."""
    if n < 0:
        raise ValueError("numerals are for naturals")
    e = closed_definition("zero")
    pair_false = ap(closed_definition("pair"), closed_definition("false"))
    for _ in range(n):
        e = ap(pair_false, e)
    return e


class Kit:
    """Kit constants evaluated in one model."""

    def __init__(self, model: PpcaModel, params=None, fuel: int = DEFAULT_FUEL):
        self.model = model
        self.params = tuple(model.params if params is None else params)
        self.fuel = fuel
        self._values: dict[str, object] = {}
        self._numerals: list = []

    def expr(self, name: str) -> CombExpr:
        """Definition of ``name`` with dependencies replaced by their values."""
        return substitute(DEFINITIONS[name], {"kit:" + d: self[d] for d in _deps(name)})

    def __getitem__(self, name: str):
        if name not in self._values:
            if name not in DEFINITIONS:
                raise KeyError(name)
            self._values[name] = ucode(self.model, self.expr(name), self.params, self.fuel)
        return self._values[name]

    def const(self, name: str) -> Const:
        return Const(self[name])

    def numeral(self, n: int):
        if n < 0:
            raise ValueError("numerals are for naturals")
        while len(self._numerals) <= n:
            if not self._numerals:
                self._numerals.append(self["zero"])
            else:
                prev = self._numerals[-1]
                e = ap(self.const("pair"), self.const("false"), Const(prev))
                self._numerals.append(ucode(self.model, e, self.params, self.fuel))
        return self._numerals[n]

    def numeral_index(self, value, limit: int = 1000) -> int | None:
        """Which numeral ``value`` is, searching up to ``limit``."""
        for n in range(limit + 1):
            if self.numeral(n) == value:
                return n
        return None

    def boolean(self, b: bool):
        return self["true"] if b else self["false"]

    def resolve(self, text: str) -> Const:
        """Resolve ``kit:NAME`` or ``kit:numeral:N``."""
        parts = text.split(":")
        if parts[0] != "kit" or len(parts) not in (2, 3):
            raise KeyError(text)
        if parts[1] == "numeral":
            if len(parts) != 3 or not parts[2].isdigit():
                raise KeyError(text)
            return Const(self.numeral(int(parts[2])))
        if len(parts) != 2:
            raise KeyError(text)
        return Const(self[parts[1]])

    def call(self, param, name_or_value, *args, fuel: int | Fuel | None = None) -> EvalOutcome:
        head = self.const(name_or_value) if isinstance(name_or_value, str) else Const(name_or_value)
        e = ap(head, *(Const(a) for a in args))
        return eval_at(self.model, param, e, self.fuel if fuel is None else fuel)

    def table(self) -> dict[str, object]:
        return {n: self[n] for n in CORE_NAMES}

    # -- derived realizers ---------------------------------------------------

    def characteristic(self, bits) -> object:
        """A realizer sending ``n`` to the numeral ``bits[n]`` (0 past the end)."""
        f = self.value_of(ap(K, Const(self.numeral(0))))
        for b in reversed(list(bits)):
            body = ap(
                self.const("if"),
                ap(self.const("iszero"), "n"),
                ap(K, Const(self.numeral(int(b)))),
                lam("y", ap(Const(f), ap(self.const("pred"), "n"))),
                self.const("id"),
            )
            f = self.value_of(lam("n", body))
        return f

    def value_of(self, e: CombExpr):
        return ucode(self.model, e, self.params, self.fuel)


def primrec_apply(kit: Kit, param, a, f, n: int, fuel: int | Fuel = DEFAULT_FUEL) -> EvalOutcome:
    return kit.call(param, "primrec", a, f, kit.numeral(n), fuel=fuel)


def markov_search(kit: Kit, param, f, fuel: int | Fuel = DEFAULT_FUEL) -> EvalOutcome:
    """Least ``n`` with ``f n`` = 1, as a numeral; runs until fuel is spent otherwise."""
    return kit.call(param, "search", f, fuel=fuel)


def showcase_terms() -> dict[str, CombExpr]:
    return {n: closed_definition(n) for n in SHOWCASE}


# ---------------------------------------------------------------------------
# numbers <-> numerals in the oracle model


class OracleConversions:
    """``num`` maps numerals to numbers, ``cur`` numbers to numerals."""

    def __init__(self, kit: Kit):
        from .oraclemodel import OracleModel, kleene_fix

        if not isinstance(kit.model, OracleModel):
            raise TypeError("number/numeral conversion lives in the oracle model")
        self.kit = kit
        self.succ_code = M.encode(M.succ(M.INPUT))
        # K s, not s: primrec passes the counter as well as the previous value
        self.num = kit.value_of(ap(kit.const("primrec"), Const(0), ap(K, Const(self.succ_code))))
        step = M.tmpl(
            M.if_(
                M.INPUT,
                M.apply_(M.lit(kit["succ"]), M.apply_(M.H0, M.pred(M.INPUT))),
                M.lit(kit.numeral(0)),
            ),
            M.INPUT,
        )
        self.transformer = M.encode(step)
        self.cur = kleene_fix(self.transformer)


# ---------------------------------------------------------------------------
# fuel-sliced processes and the majority scheduler


@dataclass(frozen=True)
class Running:
    pass


@dataclass(frozen=True)
class Done:
    value: object


@dataclass(frozen=True)
class Halted:
    """The process stopped without a value."""

    reason: str = ""


class SlicedProcess:
    """A computation advanced in fuel slices.

    ``run(fuel)`` must be a deterministic function returning an outcome.  A
    slice re-runs it with the cumulative budget, which is the same as resuming
    because evaluation is deterministic.  Done and Halted are absorbing.
    """

    def __init__(self, run):
        self._run = run
        self.budget = 0
        self.slices = 0
        self.state = Running()

    def step(self, budget: int):
        if not isinstance(self.state, Running):
            return self.state
        self.budget += budget
        self.slices += 1
        out = self._run(self.budget)
        if isinstance(out, Value):
            self.state = Done(out.value)
        elif isinstance(out, Undefined):
            self.state = Halted(out.reason)
        return self.state

    @classmethod
    def evaluation(cls, model: PpcaModel, param, e: CombExpr) -> "SlicedProcess":
        return cls(lambda fuel: eval_at(model, param, e, fuel))


class ScriptedProcess(SlicedProcess):
    """Answers ``answer`` on its ``finish_at``-th slice; never if that is None."""

    def __init__(self, answer, finish_at: int | None):
        def run(fuel):
            if finish_at is not None and self.slices >= finish_at:
                if isinstance(answer, Halted):
                    return Undefined(answer.reason)
                return Value(answer)
            return FuelExhausted(fuel)

        super().__init__(run)


@dataclass(frozen=True)
class Agreed:
    value: object
    by: tuple[int, int]
    slices: tuple[int, int, int]


@dataclass(frozen=True)
class Disagreement:
    """Every process halted and no two agree: the premise was violated."""

    answers: tuple
    slices: tuple[int, int, int]


@dataclass(frozen=True)
class NoAgreementYet:
    rounds: int
    slices: tuple[int, int, int]


MAJORITY_SLICE = 64


def majority_decide(p1: SlicedProcess, p2: SlicedProcess, p3: SlicedProcess,
                    budget: int = MAJORITY_SLICE, max_rounds: int = 100_000):
    """Round-robin the three processes until two report the same value."""
    procs = (p1, p2, p3)
    for rnd in range(1, max_rounds + 1):
        for i, p in enumerate(procs):
            if not isinstance(p.state, Running):
                continue
            st = p.step(budget)
            if isinstance(st, Done):
                for j, q in enumerate(procs):
                    if j != i and isinstance(q.state, Done) and q.state.value == st.value:
                        return Agreed(st.value, tuple(sorted((i, j))), tuple(x.slices for x in procs))
        if all(not isinstance(p.state, Running) for p in procs):
            return Disagreement(tuple(p.state for p in procs), tuple(x.slices for x in procs))
    return NoAgreementYet(max_rounds, tuple(x.slices for x in procs))
