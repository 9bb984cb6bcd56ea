"""Parameterized partial combinatory algebras and realizability checkers."""

from .core import (
    DEFAULT_FUEL,
    Counterexample,
    Fuel,
    FuelExhausted,
    Inconclusive,
    PpcaModel,
    Undefined,
    Value,
    Verified,
    kleene_equal,
)
from .kit import Kit
from .oraclemodel import DEFAULT_ORACLES, OracleModel, oracle_model
from .termmodel import TermModel, term_model
from .terms import App, Const, K, S, Var, abstract, ap, eval_at, is_uniform, lam, parse, substitute, to_text, ucode

__all__ = [
    "DEFAULT_FUEL",
    "Counterexample",
    "Fuel",
    "FuelExhausted",
    "Inconclusive",
    "PpcaModel",
    "Undefined",
    "Value",
    "Verified",
    "kleene_equal",
    "Kit",
    "DEFAULT_ORACLES",
    "OracleModel",
    "oracle_model",
    "TermModel",
    "term_model",
    "App",
    "Const",
    "K",
    "S",
    "Var",
    "abstract",
    "ap",
    "eval_at",
    "is_uniform",
    "lam",
    "parse",
    "substitute",
    "to_text",
    "ucode",
]
