"""Command-line front end.

Exit codes: 0 verified or success, 1 counterexample / gap / undefined,
2 inconclusive or fuel exhausted, 3 usage error.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import cover as C
from . import reals as R
from .assemblies import Assembly, check_map, finite_assembly, obj_n, obj_q, obj_z
from .core import DEFAULT_FUEL, Counterexample, FuelExhausted, Inconclusive, Undefined, Value, Verified
from .kit import CORE_NAMES, Kit
from .machine import Oracle
from .oraclemodel import DEFAULT_ORACLES, OracleModel
from .termmodel import TermModel
from .terms import ParseError, eval_at, is_closed, is_uniform, parse, to_text
from .tripos import (
    FormulaEnv,
    FormulaError,
    TriposContext,
    TriposPredicate,
    check_entailment,
    is_valid,
    parse_formula,
)

OK, FAIL, UNKNOWN, USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# shared configuration


class Config:
    def __init__(self, args):
        self.args = args
        self.fuel = args.fuel
        self.seed = args.seed
        self.depth = args.depth
        oracles = [Oracle.from_text(t) for t in args.oracle] if args.oracle else list(DEFAULT_ORACLES)
        if args.params is not None:
            if args.params < 1:
                raise UsageError("--params must be at least 1")
            oracles = oracles[: args.params]
        self.oracles = tuple(oracles)
        self.model = TermModel() if args.model == "term" else OracleModel(self.oracles)
        self._kit = None

    @property
    def kit(self) -> Kit:
        if self._kit is None:
            self._kit = Kit(self.model, self.model.params, self.fuel)
        return self._kit

    def parse_expr(self, text: str):
        return parse(text, literal=self.model.from_text, resolve=self.kit.resolve)

    def value(self, text: str):
        e = self.parse_expr(text)
        if not is_closed(e):
            raise UsageError(f"expression is not closed: {text}")
        return self.kit.value_of(e)

    def show(self, v) -> str:
        return self.model.to_text(v)

    def show_param(self, p) -> str:
        return self.model.param_to_text(p)


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad rational {text!r}") from None


def _fracs(text: str) -> list[Fraction]:
    return [_frac(t) for t in text.split(",") if t.strip()]


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _verdict(cfg: Config, cert, describe_point=str) -> int:
    if isinstance(cert, Verified):
        w = cert.witness
        print("verified" if w is None else f"verified {_show_any(cfg, w)}")
        return OK
    if isinstance(cert, Counterexample):
        parts = [f"point={describe_point(cert.point)}"]
        if cert.realizer is not None:
            parts.append(f"realizer={_show_any(cfg, cert.realizer)}")
        if cert.param is not None:
            parts.append(f"param={cfg.show_param(cert.param)}")
        if cert.note:
            parts.append(f"note={cert.note}")
        print("counterexample " + " ".join(parts))
        return FAIL
    print(f"inconclusive {cert.reason}")
    return UNKNOWN


def _show_any(cfg: Config, v) -> str:
    if isinstance(v, R.RealRealizer):
        return repr(v)
    try:
        if cfg.model.is_element(v):
            return cfg.show(v)
    except Exception:  # noqa: BLE001 - fall back to repr for foreign objects
        pass
    return repr(v)


def _outcome(cfg: Config, o) -> tuple[str, int]:
    if isinstance(o, Value):
        return cfg.show(o.value), OK
    if isinstance(o, Undefined):
        return f"undefined{(' ' + o.reason) if o.reason else ''}", FAIL
    return f"fuel-exhausted {o.steps}", UNKNOWN


# ---------------------------------------------------------------------------
# term-core and kit


def cmd_eval(cfg: Config, a) -> int:
    e = cfg.parse_expr(a.expr)
    if not is_closed(e):
        raise UsageError("eval needs a closed expression")
    results = [(p, eval_at(cfg.model, p, e, cfg.fuel)) for p in cfg.model.params]
    texts = [_outcome(cfg, o) for _, o in results]
    if len({t for t, _ in texts}) == 1:
        print(texts[0][0])
    else:
        for (p, _), (t, _) in zip(results, texts):
            print(f"{cfg.show_param(p)}\t{t}")
    return max(code for _, code in texts)


def cmd_compile(cfg: Config, a) -> int:
    e = cfg.parse_expr(a.expr)
    print(to_text(e, cfg.show))
    if a.value:
        if not is_closed(e):
            raise UsageError("--value needs a closed expression")
        u = is_uniform(cfg.model, e, cfg.model.params, cfg.fuel)
        if u.verdict is True:
            print(cfg.show(u.witness))
            return OK
        print("not-uniform" if u.verdict is False else "inconclusive")
        return FAIL if u.verdict is False else UNKNOWN
    return OK


def cmd_uniform(cfg: Config, a) -> int:
    e = cfg.parse_expr(a.expr)
    if not is_closed(e):
        raise UsageError("uniform needs a closed expression")
    u = is_uniform(cfg.model, e, cfg.model.params, cfg.fuel)
    if u.verdict is True:
        print(f"uniform {cfg.show(u.witness)}")
        return OK
    if u.verdict is False:
        print("not-uniform")
        for p, o in zip(cfg.model.params, u.outcomes):
            print(f"{cfg.show_param(p)}\t{_outcome(cfg, o)[0]}")
        return FAIL
    print("inconclusive")
    return UNKNOWN


def cmd_kit(cfg: Config, a) -> int:
    kit = cfg.kit
    if a.name is None:
        for name in CORE_NAMES:
            print(f"{name}\t{cfg.show(kit[name])}")
        return OK
    print(cfg.show(kit.resolve(a.name if a.name.startswith("kit:") else "kit:" + a.name).value))
    return OK


# ---------------------------------------------------------------------------
# predicate files


def _labels(text: str) -> object:
    parts = [p.strip() for p in text.split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


def load_predicate(cfg: Config, ctx: TriposContext, path: str) -> TriposPredicate:
    """Lines ``label: expr; expr`` (labels of tuple points are comma-separated)."""
    table = {}
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, sep, rest = line.partition(":")
        if not sep or not label.strip():
            raise UsageError(f"{path}: line {lineno}: expected 'label: realizers'")
        elems = []
        for chunk in rest.split(";"):
            if chunk.strip():
                try:
                    elems.append(cfg.value(chunk))
                except ParseError as exc:
                    raise UsageError(f"{path}: line {lineno}: {exc}") from None
        table[_labels(label)] = elems
    return TriposPredicate.finite(ctx, table, Path(path).stem)


def _context(cfg: Config) -> TriposContext:
    return TriposContext(cfg.model, cfg.model.params, fuel=cfg.fuel, kit=cfg.kit)


def cmd_entail(cfg: Config, a) -> int:
    if len(a.pred) != 2:
        raise UsageError("entail needs exactly two --pred files")
    ctx = _context(cfg)
    phi, psi = (load_predicate(cfg, ctx, p) for p in a.pred)
    if phi.universe != psi.universe:
        raise UsageError("the two predicates list different points")
    return _verdict(cfg, check_entailment(phi, psi, cfg.value(a.witness)))


def cmd_formula(cfg: Config, a) -> int:
    ctx = _context(cfg)
    universes = {}
    for spec in a.universe:
        name, sep, labels = spec.partition("=")
        if not sep:
            raise UsageError(f"--universe wants NAME=a,b,c, got {spec!r}")
        universes[name.strip()] = [x.strip() for x in labels.split(",") if x.strip()]
    preds = {}
    for spec in a.pred:
        head, sep, path = spec.partition("=")
        name, sep2, sig = head.partition(":")
        if not (sep and sep2):
            raise UsageError(f"--pred wants NAME:U1,U2=FILE, got {spec!r}")
        sig = tuple(s.strip() for s in sig.split(","))
        raw = load_predicate(cfg, ctx, path)
        # points are always tuples inside formulas
        table = {(x if isinstance(x, tuple) else (x,)): raw(x) for x in raw.universe}
        preds[name.strip()] = (sig, TriposPredicate(list(table), table, ctx, name))
    env = FormulaEnv(ctx, universes, preds)
    context = []
    for spec in a.context:
        v, sep, u = spec.partition(":")
        if not sep:
            raise UsageError(f"--context wants VAR:UNIVERSE, got {spec!r}")
        context.append((v.strip(), u.strip()))
    try:
        f = parse_formula(a.formula)
        res = is_valid(f, context, env, bound=a.bound, forall_mode=a.forall)
    except FormulaError as exc:
        raise UsageError(str(exc)) from None
    if res.verdict is True:
        print(f"valid {cfg.show(res.witness)}")
        return OK
    print("not-valid" if res.verdict is False else "inconclusive")
    return FAIL if res.verdict is False else UNKNOWN


# ---------------------------------------------------------------------------
# assemblies


def _assembly(cfg: Config, ctx: TriposContext, spec: str, sample: int) -> Assembly:
    if spec == "N":
        return obj_n(ctx, sample)
    if spec == "Z":
        return obj_z(ctx, sample)
    if spec == "Q":
        return obj_q(ctx, sample)
    pred = load_predicate(cfg, ctx, spec)
    return finite_assembly(ctx, pred.name, {x: pred(x).samples() for x in pred.universe})


def _function(spec: str, target: Assembly):
    if spec == "id":
        return lambda x: x
    if spec == "succ":
        return lambda x: x + 1
    if spec == "pred":
        return lambda x: max(x - 1, 0)
    if spec == "neg":
        return lambda x: -x
    if spec.startswith("const:"):
        label = spec[len("const:"):]
        value = _frac(label) if target.name in ("N", "Z", "Q") else label
        if target.name in ("N", "Z"):
            value = int(value)
        return lambda x: value
    if spec.startswith("table:"):
        pairs = [p.split("=", 1) for p in spec[len("table:"):].split(",") if p]
        if any(len(p) != 2 for p in pairs):
            raise UsageError("table: wants x=y pairs")
        table = {k.strip(): v.strip() for k, v in pairs}
        return lambda x: table.get(str(x))
    raise UsageError(f"unknown map {spec!r}")


def cmd_assembly(cfg: Config, a) -> int:
    ctx = _context(cfg)
    X = _assembly(cfg, ctx, a.source, a.range)
    Y = _assembly(cfg, ctx, a.target, a.range)
    f = _function(a.fn, Y)
    return _verdict(cfg, check_map(X, Y, f, cfg.value(a.witness)))


# ---------------------------------------------------------------------------
# reals


def _realizer(spec: str) -> R.RealRealizer:
    kind, _, arg = spec.partition(":")
    if kind == "const":
        return R.ProgramRealizer(R.constant_program(_frac(arg)), _frac(arg))
    if kind == "binary":
        return R.ProgramRealizer(R.binary_program(_frac(arg)), _frac(arg))
    if kind == "shifted":
        return R.ProgramRealizer(R.shifted_program(_frac(arg)))
    if kind == "rule":
        return R.binary_rule(_frac(arg))
    if kind == "code":
        if not arg.isdigit():
            raise UsageError("code: wants a natural number")
        return R.ProgramRealizer(int(arg))
    if kind == "w":
        return R.ProgramRealizer(R.W_CODE)
    raise UsageError(f"unknown realizer {spec!r}; use const:q, binary:q, shifted:q, rule:q, code:N or w")


def cmd_real_check(cfg: Config, a) -> int:
    r = _realizer(a.realizer)
    cert = R.check_real_realizer(r, _frac(a.target), cfg.depth, cfg.oracles, cfg.fuel)
    if isinstance(cert, Counterexample):
        print(f"counterexample k={cert.point} param={cert.param.to_text()} {cert.note}")
        return FAIL
    if isinstance(cert, Inconclusive):
        print(f"inconclusive {cert.reason}")
        return UNKNOWN
    print(f"verified depth={cfg.depth}")
    return OK


def cmd_compare(cfg: Config, a) -> int:
    r, s = _realizer(a.left), _realizer(a.right)
    o = R.compare_apart(r, s, cfg.oracles[0], cfg.fuel)
    if isinstance(o, R.Less):
        print(f"less {_fmt(o.witness)} k={o.k}")
        return OK
    if isinstance(o, R.Greater):
        print(f"greater {_fmt(o.witness)} k={o.k}")
        return OK
    if isinstance(o, FuelExhausted):
        print(f"fuel-exhausted {o.steps}")
        return UNKNOWN
    print(f"undefined {o.reason}")
    return FAIL


def _random_rationals(seed: int, n: int, lo=-2, hi=2) -> list[Fraction]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        den = rng.randint(1, 40)
        out.append(Fraction(rng.randint(lo * den, hi * den), den))
    return out


def cmd_diag(cfg: Config, a) -> int:
    steps = a.steps
    seq = _fracs(a.seq) if a.seq else _random_rationals(cfg.seed, steps)
    if len(seq) < steps:
        raise UsageError(f"--seq has {len(seq)} terms, need {steps}")
    if a.kind == "cantor":
        rows = R.cantor_avoid(seq, steps)
    else:

        def table(n, k):
            q = seq[n]
            s = 1 << (k + 1)
            return Fraction((q.numerator * s) // q.denominator, s)

        rows = R.cauchy_avoid(table, steps)
    for n, (lo, hi) in enumerate(rows):
        print(f"{n} {_fmt(lo)} {_fmt(hi)}")
    return OK


def _program_code(spec: str) -> int:
    r = _realizer(spec)
    if not isinstance(r, R.ProgramRealizer):
        raise UsageError("interval traces need a machine program, not a rule")
    return r.code


def cmd_interval(cfg: Config, a) -> int:
    code = _program_code(a.realizer)
    if a.kind == "I":
        trace = R.interval_I(code, cfg.oracles[0], cfg.depth)
        sys.stdout.write(trace.to_text())
    else:
        iv = R.interval_J_approx(code, cfg.oracles, cfg.depth)
        print(f"{cfg.depth} {_fmt(iv.lo)} {_fmt(iv.hi)}")
    return OK


# ---------------------------------------------------------------------------
# covers


def _load_cover(path: str) -> list[C.RatInterval]:
    try:
        return C.parse_cover(_read(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_cover(cfg: Config, a) -> int:
    if a.action == "singular":
        if a.points:
            pts = _fracs(a.points)
        else:
            rng = random.Random(cfg.seed)
            pts = [Fraction(rng.randint(0, 64), 64) for _ in range(a.n)]
        sys.stdout.write(C.format_cover(C.singular_cover(pts, _frac(a.eps))))
        return OK
    ivs = _load_cover(a.file)
    if a.action == "point":
        closed = [iv for iv in ivs if iv.kind == C.CLOSED]
        windows = [iv for iv in ivs if iv.kind == C.OPEN]
        if len(windows) != 1:
            raise UsageError("cover point wants exactly one open line (the window)")
        try:
            x = C.uncovered_point(closed, windows[0])
        except C.PreconditionViolated as exc:
            print(f"precondition-violated {exc}")
            return FAIL
        print(_fmt(x))
        return OK
    if a.action == "subcover":
        res = C.finite_subcover(ivs, a.n)
        if isinstance(res, C.Covered):
            print("covered " + " ".join(map(str, res.indices)))
            return OK
        print(f"gap {_fmt(res.witness)}")
        return FAIL
    if a.action == "normalize":
        out = C.normalize_well_behaved(ivs, a.stages)
        sys.stdout.write(C.format_cover(out))
        return OK
    if a.action == "tent":
        print(_fmt(C.tent_sum(ivs, _frac(a.x), a.n or len(ivs))))
        return OK
    raise UsageError(f"unknown cover action {a.action}")


# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, defaults: bool) -> None:
    def d(value):
        return value if defaults else argparse.SUPPRESS

    p.add_argument("--model", choices=("term", "oracle"), default=d("term"))
    p.add_argument("--oracle", action="append", default=d([]), metavar="SPEC",
                   help="oracle as 'prefix=0110; period=01' (repeatable; default: five built-in oracles)")
    p.add_argument("--params", type=int, default=d(None), help="use only the first N oracles")
    p.add_argument("--fuel", type=int, default=d(DEFAULT_FUEL), help=f"evaluation budget (default {DEFAULT_FUEL})")
    p.add_argument("--depth", type=int, default=d(20), help="precision or trace depth (default 20)")
    p.add_argument("--seed", type=int, default=d(0), help="seed for generated inputs (default 0)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ppcakit", description="ppca workbench")
    _add_common(p, defaults=True)
    # subcommands accept the same flags; SUPPRESS keeps them from resetting
    # values given before the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, defaults=False)

    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", parents=[common], help="evaluate a closed expression")
    s.add_argument("expr")
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("compile", parents=[common], help="print the compiled combinator term")
    s.add_argument("expr")
    s.add_argument("--value", action="store_true", help="also print its uniform value")
    s.set_defaults(run=cmd_compile)

    s = sub.add_parser("uniform", parents=[common], help="check uniformity across parameters")
    s.add_argument("expr")
    s.set_defaults(run=cmd_uniform)

    s = sub.add_parser("kit", parents=[common], help="list kit constants or show one")
    s.add_argument("name", nargs="?")
    s.set_defaults(run=cmd_kit)

    s = sub.add_parser("entail", parents=[common], help="check a witness for phi <= psi")
    s.add_argument("--pred", action="append", default=[], required=True)
    s.add_argument("--witness", required=True)
    s.set_defaults(run=cmd_entail)

    s = sub.add_parser("formula", parents=[common], help="search a validity witness")
    s.add_argument("formula")
    s.add_argument("--universe", action="append", default=[])
    s.add_argument("--pred", action="append", default=[])
    s.add_argument("--context", action="append", default=[])
    s.add_argument("--forall", choices=("guarded", "simple"), default="guarded")
    s.add_argument("--bound", type=int, default=32)
    s.set_defaults(run=cmd_formula)

    s = sub.add_parser("assembly", parents=[common], help="check a realized assembly map")
    s.add_argument("--from", dest="source", required=True, help="N, Z, Q or a predicate file")
    s.add_argument("--to", dest="target", required=True)
    s.add_argument("--fn", required=True, help="id, succ, pred, neg, const:X or table:a=b,...")
    s.add_argument("--witness", required=True)
    s.add_argument("--range", type=int, default=200)
    s.set_defaults(run=cmd_assembly)

    s = sub.add_parser("real-check", parents=[common], help="verify a real realizer")
    s.add_argument("--realizer", required=True)
    s.add_argument("--target", required=True)
    s.set_defaults(run=cmd_real_check)

    s = sub.add_parser("compare", parents=[common], help="order two apart reals")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s.set_defaults(run=cmd_compare)

    s = sub.add_parser("diag", parents=[common], help="run a diagonalizer")
    s.add_argument("kind", choices=("cantor", "cauchy"))
    s.add_argument("--seq", help="comma-separated rationals (random from --seed otherwise)")
    s.add_argument("--steps", type=int, default=10)
    s.set_defaults(run=cmd_diag)

    s = sub.add_parser("interval", parents=[common], help="interval-domain traces")
    s.add_argument("kind", choices=("I", "J"))
    s.add_argument("--realizer", required=True)
    s.set_defaults(run=cmd_interval)

    s = sub.add_parser("cover", parents=[common], help="interval-cover algorithms")
    acts = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    c = acts.add_parser("point", parents=[common], help="closed intervals plus one open window")
    c.add_argument("file")
    c = acts.add_parser("singular", parents=[common], help="singular cover of given or random points")
    c.add_argument("--eps", default="1/2")
    c.add_argument("--points", help="comma-separated rationals (random from --seed otherwise)")
    c.add_argument("--n", type=int, default=8, help="how many random points")
    c = acts.add_parser("normalize", parents=[common], help="well-behaved normalization")
    c.add_argument("file")
    c.add_argument("--stages", type=int, default=4)
    c = acts.add_parser("subcover", parents=[common], help="does a prefix cover [0, 1]?")
    c.add_argument("file")
    c.add_argument("--n", type=int, default=None)
    c = acts.add_parser("tent", parents=[common], help="weighted tent sum at a point")
    c.add_argument("file")
    c.add_argument("--x", required=True)
    c.add_argument("--n", type=int, default=None)
    s.set_defaults(run=cmd_cover)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(args)
        return args.run(cfg, args)
    except ParseError as exc:
        print(f"error: parse error at {exc}", file=sys.stderr)
        return USAGE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return OK


if __name__ == "__main__":
    sys.exit(main())
