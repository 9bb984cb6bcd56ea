"""The oracle-machine ppca: carrier N, parameters are oracles.

``m ._alpha n`` runs the program coded by ``m`` on input ``n`` with oracle
``alpha``.  K and S are templates, so partial applications of them only build
codes and never touch the oracle.
"""

from __future__ import annotations

import sys
from typing import Sequence

from . import machine as M
from .core import DEFAULT_FUEL, EvalOutcome, Fuel, PpcaModel, run_metered
from .machine import Oracle

# K.a is the code of the constant program returning a.
K_CODE = M.encode(M.tmpl(M.H0, M.INPUT))

# S.a = code of tmpl(...)(a, in); S.a.b = code of (a in)(b in) with a, b literal.
S_CODE = M.encode(
    M.tmpl(
        M.tmpl(M.apply_(M.apply_(M.H0, M.INPUT), M.apply_(M.H1, M.INPUT)), M.H0, M.INPUT),
        M.INPUT,
    )
)

# a program computing smn(e, m) from the pair <e, m>
SMN_CODE = M.encode(M.tmpl(M.apply_(M.H0, M.pair(M.H1, M.INPUT)), M.fst(M.INPUT), M.snd(M.INPUT)))


def smn(e: int, m: int) -> int:
    """Code of ``n -> phi_e(<m, n>)``.  Total and oracle-free."""
    return M.encode(M.apply_(M.lit(e), M.pair(M.lit(m), M.INPUT)))


def _diagonal_code(x: int) -> int:
    # n -> phi_{phi_x(x)}(n)
    return M.encode(M.apply_(M.apply_(M.lit(x), M.lit(x)), M.INPUT))


def kleene_fix(t: int) -> int:
    """A code ``f`` with ``phi_f = phi_{phi_t(f)}`` (recursion theorem).

    ``v`` maps ``x`` to ``phi_t(d(x))`` where ``d`` is the diagonal; the fixed
    point is ``d(v)``.
    """
    diag = M.tmpl(M.apply_(M.apply_(M.H0, M.H0), M.INPUT), M.INPUT)
    v = M.encode(M.apply_(M.lit(t), diag))
    return _diagonal_code(v)


# Numerals are codes nested inside codes and run to thousands of digits.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

DEFAULT_ORACLES = (
    Oracle((), (0,)),
    Oracle((), (1,)),
    Oracle((), (0, 1)),
    Oracle((1, 1, 0), (1, 0, 0)),
    Oracle((0, 1, 1, 0, 1), (0, 1, 1)),
)


class OracleModel(PpcaModel):
    name = "oracle"
    K = K_CODE
    S = S_CODE

    def __init__(self, params: Sequence[Oracle] = DEFAULT_ORACLES):
        super().__init__(params)

    def _apply(self, param, a, b, meter: Fuel):
        return M.run_code(a, b, param, meter)

    def run(self, param, code: int, x: int, fuel: int | Fuel = DEFAULT_FUEL) -> EvalOutcome:
        return run_metered(self._apply, fuel, param, code, x)

    def to_text(self, element) -> str:
        return str(element)

    def from_text(self, text: str):
        text = text.strip()
        if not text.isdigit():
            raise ValueError(f"oracle-model elements are naturals, got {text!r}")
        return int(text)

    def is_element(self, obj) -> bool:
        return isinstance(obj, int) and not isinstance(obj, bool) and obj >= 0

    def param_to_text(self, param) -> str:
        return param.to_text()

    def param_from_text(self, text: str):
        return Oracle.from_text(text)


def oracle_model(params: Sequence[Oracle] = DEFAULT_ORACLES) -> OracleModel:
    return OracleModel(params)
