"""Jet-space symbolic kernel.

Expression trees over the jet coordinates of the peakon equation class
m_t + f(u,ux)*m + (g(u,ux)*m)_x = 0,  m = u - u_xx.

Canonical coordinates are {x, t, u, ux, m, mx, mxx, ...} plus the
first-order-in-t variables {ut, utx, mt, mtx, mtxx, ...}; u_xx and higher
x-derivatives of u are always eliminated through u_xx = u - m.  The pure
u-jet representation (u, ux, uxx, ... and ut, utx, ...) is used internally
by the spatial Euler operators and is reachable via to_u_jet / to_m_jet.

Everything here is immutable and side-effect free; randomized zero testing
takes an explicit SamplingPolicy carrying its own seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "ExprError",
    "ParseError",
    "SingularSamplingError",
    "JetVar",
    "Expr",
    "Const",
    "Param",
    "Var",
    "Add",
    "Mul",
    "Pow",
    "Fn",
    "add",
    "mul",
    "sub",
    "div",
    "neg",
    "pow_",
    "fn",
    "const",
    "var",
    "parse",
    "to_source",
    "evaluate",
    "evaluate_with_scale",
    "jet_vars",
    "param_names",
    "d_x",
    "d_t",
    "to_u_jet",
    "to_m_jet",
    "diff",
    "euler_u",
    "euler_ut",
    "poly_normal_form",
    "SamplingPolicy",
    "ZeroVerdict",
    "is_zero",
    "sample_points",
]

# hard caps: all computations in this problem class live within
# 4 x-derivatives of m and a single t-derivative
MAX_M_XORDER = 4
MAX_UJET_XORDER = 12

FN_NAMES = ("exp", "ln", "sqrt", "sin", "cos", "arctanh")


class ExprError(ValueError):
    """Invalid expression construction or operation."""


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SingularSamplingError(RuntimeError):
    """Every attempted sample point evaluated to a non-finite value."""


# ---------------------------------------------------------------------------
# jet variables


@dataclass(frozen=True, order=True)
class JetVar:
    """A jet coordinate: base symbol with x- and t-derivative counts."""

    base: str  # "u" | "m" | "x" | "t"
    dx: int = 0
    dt: int = 0

    def __post_init__(self):
        if self.base not in ("u", "m", "x", "t"):
            raise ExprError(f"unknown jet base {self.base!r}")
        if self.base in ("x", "t") and (self.dx or self.dt):
            raise ExprError("independent variables carry no derivative index")
        if self.dt > 1:
            raise ExprError(f"t-derivative order capped at 1: {self.name}")
        if self.base == "m" and self.dx > MAX_M_XORDER:
            raise ExprError(f"m-derivative order capped at {MAX_M_XORDER}: {self.name}")
        if self.base == "u" and self.dx > MAX_UJET_XORDER:
            raise ExprError(f"u-jet order cap exceeded: {self.name}")

    @property
    def name(self) -> str:
        return self.base + "t" * self.dt + "x" * self.dx

    @property
    def is_canonical(self) -> bool:
        """True if the variable belongs to the canonical m-jet chart."""
        if self.base in ("x", "t"):
            return True
        if self.base == "u":
            return self.dx <= 1
        return True

    @staticmethod
    def from_name(name: str) -> "JetVar":
        base, rest = name[0], name[1:]
        dt = 0
        if rest.startswith("t"):
            dt, rest = 1, rest[1:]
        dx = len(rest)
        if rest != "x" * dx:
            raise ExprError(f"not a jet variable name: {name!r}")
        return JetVar(base, dx, dt)


X = JetVar("x")
T = JetVar("t")
U = JetVar("u")
UX = JetVar("u", 1)
UT = JetVar("u", 0, 1)
UTX = JetVar("u", 1, 1)
M = JetVar("m")
MT = JetVar("m", 0, 1)

# identifiers accepted by the parser (canonical chart only)
_PARSE_VARS = {
    v.name: v
    for v in (
        X, T, U, UX, UT, UTX,
        *(JetVar("m", k) for k in range(MAX_M_XORDER + 1)),
        *(JetVar("m", k, 1) for k in range(MAX_M_XORDER + 1)),
    )
}


# ---------------------------------------------------------------------------
# expression nodes


@dataclass(frozen=True)
class Expr:
    def __add__(self, other):
        return add(self, _as_expr(other))

    def __radd__(self, other):
        return add(_as_expr(other), self)

    def __sub__(self, other):
        return sub(self, _as_expr(other))

    def __rsub__(self, other):
        return sub(_as_expr(other), self)

    def __mul__(self, other):
        return mul(self, _as_expr(other))

    def __rmul__(self, other):
        return mul(_as_expr(other), self)

    def __truediv__(self, other):
        return div(self, _as_expr(other))

    def __rtruediv__(self, other):
        return div(_as_expr(other), self)

    def __pow__(self, other):
        return pow_(self, other)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ExprError("non-finite constant")


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    v: JetVar


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: Fraction

    def __post_init__(self):
        if not isinstance(self.exp, Fraction):
            object.__setattr__(self, "exp", Fraction(self.exp))
        if self.exp.denominator == 0:  # pragma: no cover - Fraction forbids this
            raise ExprError("zero-denominator exponent")


@dataclass(frozen=True)
class Fn(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FN_NAMES:
            raise ExprError(f"unknown function {self.name!r}")


ZERO = Const(0.0)
ONE = Const(1.0)


def _as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, Fraction)):
        return Const(float(x))
    raise ExprError(f"cannot interpret {x!r} as an expression")


def const(v) -> Const:
    return Const(float(v))


def var(name_or_jv) -> Var:
    if isinstance(name_or_jv, JetVar):
        return Var(name_or_jv)
    return Var(JetVar.from_name(name_or_jv))


def _coeff_key(t: Expr) -> tuple[float, Expr]:
    if isinstance(t, Mul) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        return t.factors[0].value, (rest[0] if len(rest) == 1 else Mul(rest))
    return 1.0, t


def add(*terms) -> Expr:
    flat: list[Expr] = []
    c = 0.0
    for t in terms:
        t = _as_expr(t)
        if isinstance(t, Add):
            flat.extend(t.terms)
        elif isinstance(t, Const):
            c += t.value
        else:
            flat.append(t)
    # collect like terms; keeps trees small and sums flat
    coeffs: dict[Expr, float] = {}
    order: list[Expr] = []
    for t in flat:
        if isinstance(t, Const):
            c += t.value
            continue
        k, key = _coeff_key(t)
        if key not in coeffs:
            coeffs[key] = 0.0
            order.append(key)
        coeffs[key] += k
    rest = [mul(Const(coeffs[key]), key) for key in order if coeffs[key] != 0.0]
    if c != 0.0:
        rest.append(Const(c))
    if not rest:
        return ZERO
    if len(rest) == 1:
        return rest[0]
    return Add(tuple(rest))


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    c = 1.0
    for f in factors:
        f = _as_expr(f)
        if isinstance(f, Mul):
            flat.extend(f.factors)
        elif isinstance(f, Const):
            c *= f.value
        else:
            flat.append(f)
    rest: list[Expr] = []
    for f in flat:
        if isinstance(f, Const):
            c *= f.value
        else:
            rest.append(f)
    if c == 0.0:
        return ZERO
    # group repeated bases: ux*ux -> ux^2, b*b^-1 -> 1
    grouped: list[tuple[Expr, Fraction]] = []
    for f in rest:
        b, e = (f.base, f.exp) if isinstance(f, Pow) else (f, Fraction(1))
        for i, (gb, ge) in enumerate(grouped):
            if gb == b:
                grouped[i] = (gb, ge + e)
                break
        else:
            grouped.append((b, e))
    rest = [pow_(b, e) for b, e in grouped if e != 0]
    rest = [f for f in rest if not (isinstance(f, Const) and f.value == 1.0)]
    if not rest:
        return Const(c)
    # distribute a plain constant over a sum; keeps sums flat so that the
    # additive cancellation scale in is_zero stays sharp
    if len(rest) == 1 and isinstance(rest[0], Add) and c != 1.0:
        return add(*(mul(Const(c), t) for t in rest[0].terms))
    if c != 1.0:
        rest.insert(0, Const(c))
    if len(rest) == 1:
        return rest[0]
    return Mul(tuple(rest))


def neg(e) -> Expr:
    return mul(Const(-1.0), _as_expr(e))


def sub(a, b) -> Expr:
    return add(_as_expr(a), neg(b))


def div(a, b) -> Expr:
    b = _as_expr(b)
    if isinstance(b, Const):
        if b.value == 0.0:
            raise ExprError("division by constant zero")
        return mul(_as_expr(a), Const(1.0 / b.value))
    return mul(_as_expr(a), pow_(b, -1))


def pow_(base, exp) -> Expr:
    base = _as_expr(base)
    if isinstance(exp, Expr):
        if not isinstance(exp, Const):
            raise ExprError("exponents must be rational constants")
        exp = exp.value
    exp = Fraction(exp).limit_denominator(10**9) if isinstance(exp, float) else Fraction(exp)
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if isinstance(base, Const):
        v = _pow_float(base.value, exp)
        if math.isfinite(v):
            return Const(v)
        raise ExprError(f"constant power {base.value}^{exp} is not finite")
    if isinstance(base, Pow) and base.exp.denominator == 1 and exp.denominator == 1:
        return pow_(base.base, base.exp * exp)
    return Pow(base, exp)


def fn(name: str, arg) -> Expr:
    return Fn(name, _as_expr(arg))


# ---------------------------------------------------------------------------
# structure queries


def _children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Fn):
        return (e.arg,)
    return ()


def jet_vars(e: Expr) -> set:
    out: set[JetVar] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            out.add(n.v)
        else:
            stack.extend(_children(n))
    return out


def param_names(e: Expr) -> set:
    out: set[str] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Param):
            out.add(n.name)
        else:
            stack.extend(_children(n))
    return out


def bind_params(e: Expr, values: Mapping[str, float]) -> Expr:
    """Substitute numeric values for parameters."""
    if isinstance(e, Param):
        if e.name not in values:
            raise ExprError(f"unbound parameter {e.name!r}")
        return Const(values[e.name])
    if isinstance(e, Add):
        return add(*(bind_params(t, values) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(bind_params(f, values) for f in e.factors))
    if isinstance(e, Pow):
        return pow_(bind_params(e.base, values), e.exp)
    if isinstance(e, Fn):
        return fn(e.name, bind_params(e.arg, values))
    return e


def substitute(e: Expr, table: Mapping[JetVar, Expr]) -> Expr:
    if isinstance(e, Var):
        return table.get(e.v, e)
    if isinstance(e, Add):
        return add(*(substitute(t, table) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(substitute(f, table) for f in e.factors))
    if isinstance(e, Pow):
        return pow_(substitute(e.base, table), e.exp)
    if isinstance(e, Fn):
        return fn(e.name, substitute(e.arg, table))
    return e


# ---------------------------------------------------------------------------
# evaluation


def _pow_float(b: float, exp: Fraction) -> float:
    if exp.denominator == 1:
        k = exp.numerator
        if b == 0.0:
            return 0.0 if k > 0 else math.nan
        try:
            return b ** k
        except OverflowError:
            return math.inf if b > 0 or k % 2 == 0 else -math.inf
    if b < 0.0:
        return math.nan
    if b == 0.0:
        return 0.0 if exp > 0 else math.nan
    try:
        return b ** float(exp)
    except OverflowError:
        return math.inf


def _eval_fn(name: str, x: float) -> float:
    if math.isnan(x):
        return math.nan
    try:
        if name == "exp":
            return math.exp(x) if x < 700 else math.inf
        if name == "ln":
            return math.log(x) if x > 0 else math.nan
        if name == "sqrt":
            return math.sqrt(x) if x >= 0 else math.nan
        if name == "sin":
            return math.sin(x) if math.isfinite(x) else math.nan
        if name == "cos":
            return math.cos(x) if math.isfinite(x) else math.nan
        if name == "arctanh":
            return math.atanh(x) if -1.0 < x < 1.0 else math.nan
    except (ValueError, OverflowError):
        return math.nan
    raise ExprError(f"unknown function {name!r}")  # pragma: no cover


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    """Evaluate at a point mapping variable/parameter names to values.

    Domain violations (log of a negative number, division by zero, ...)
    yield NaN/inf rather than raising; is_zero re-samples such points.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Param):
        try:
            return float(point[e.name])
        except KeyError:
            raise ExprError(f"no value for parameter {e.name!r}") from None
    if isinstance(e, Var):
        try:
            return float(point[e.v.name])
        except KeyError:
            raise ExprError(f"no value for variable {e.v.name!r}") from None
    if isinstance(e, Add):
        return math.fsum(evaluate(t, point) for t in e.terms)
    if isinstance(e, Mul):
        r = 1.0
        for f in e.factors:
            r *= evaluate(f, point)
            if math.isnan(r):
                return math.nan
        return r
    if isinstance(e, Pow):
        b = evaluate(e.base, point)
        if math.isnan(b):
            return math.nan
        if b == 0.0 and e.exp < 0:
            return math.nan
        if e.exp < 0 and e.exp.denominator == 1:
            denom = _pow_float(b, -e.exp)
            return 1.0 / denom if denom != 0.0 else math.nan
        return _pow_float(b, e.exp)
    if isinstance(e, Fn):
        return _eval_fn(e.name, evaluate(e.arg, point))
    raise ExprError(f"cannot evaluate {type(e).__name__}")


def evaluate_with_scale(e: Expr, point: Mapping[str, float]) -> tuple[float, float]:
    """Value plus cancellation scale.

    The scale is max(1, |largest top-level additive term|); residuals in
    zero tests are judged relative to it so that massive cancellations do
    not masquerade as exact zeros.
    """
    terms = e.terms if isinstance(e, Add) else (e,)
    vals = [evaluate(t, point) for t in terms]
    total = math.fsum(vals)
    scale = max(1.0, max((abs(v) for v in vals), default=0.0))
    return total, scale


# ---------------------------------------------------------------------------
# derivatives


def _derive(e: Expr, var_rule) -> Expr:
    """Chain-rule engine; var_rule maps a JetVar to its derivative Expr."""
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Var):
        return var_rule(e.v)
    if isinstance(e, Add):
        return add(*(_derive(t, var_rule) for t in e.terms))
    if isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            dfi = _derive(f, var_rule)
            if dfi is ZERO or (isinstance(dfi, Const) and dfi.value == 0.0):
                continue
            parts.append(mul(*fs[:i], dfi, *fs[i + 1:]))
        return add(*parts)
    if isinstance(e, Pow):
        db = _derive(e.base, var_rule)
        if isinstance(db, Const) and db.value == 0.0:
            return ZERO
        return mul(Const(float(e.exp)), pow_(e.base, e.exp - 1), db)
    if isinstance(e, Fn):
        da = _derive(e.arg, var_rule)
        if isinstance(da, Const) and da.value == 0.0:
            return ZERO
        a = e.arg
        if e.name == "exp":
            return mul(e, da)
        if e.name == "ln":
            return div(da, a)
        if e.name == "sqrt":
            return div(da, mul(2, fn("sqrt", a)))
        if e.name == "sin":
            return mul(fn("cos", a), da)
        if e.name == "cos":
            return neg(mul(fn("sin", a), da))
        if e.name == "arctanh":
            return div(da, sub(1, mul(a, a)))
    raise ExprError(f"cannot differentiate {type(e).__name__}")  # pragma: no cover


def _dx_m_jet_rule(v: JetVar) -> Expr:
    if v.base == "x":
        return ONE
    if v.base == "t":
        return ZERO
    if v.base == "u":
        if v.dx == 0:
            return Var(JetVar("u", 1, v.dt))
        # u_xx = u - m  (and u_txx = u_t - m_t)
        return sub(Var(JetVar("u", 0, v.dt)), Var(JetVar("m", 0, v.dt)))
    return Var(JetVar("m", v.dx + 1, v.dt))


def _dx_u_jet_rule(v: JetVar) -> Expr:
    if v.base == "x":
        return ONE
    if v.base == "t":
        return ZERO
    if v.base == "m":
        raise ExprError("m-variables are not part of the pure u-jet")
    return Var(JetVar("u", v.dx + 1, v.dt))


def d_x(e: Expr) -> Expr:
    """Total x-derivative in the canonical m-jet chart."""
    return _derive(e, _dx_m_jet_rule)


def _dx_u(e: Expr) -> Expr:
    return _derive(e, _dx_u_jet_rule)


def _dt_rule(v: JetVar) -> Expr:
    if v.base == "x":
        return ZERO
    if v.base == "t":
        return ONE
    if v.dt >= 1:
        raise ExprError(f"t-derivative order cap: cannot apply d_t to {v.name}")
    return Var(JetVar(v.base, v.dx, 1))


def d_t(e: Expr) -> Expr:
    """Total t-derivative, off-shell (no substitution of the evolution equation)."""
    return _derive(e, _dt_rule)


def diff(e: Expr, v: JetVar | str) -> Expr:
    """Partial derivative with respect to a single jet variable."""
    target = v if isinstance(v, JetVar) else JetVar.from_name(v)

    def rule(w: JetVar) -> Expr:
        return ONE if w == target else ZERO

    return _derive(e, rule)


# ---------------------------------------------------------------------------
# chart conversions


def to_u_jet(e: Expr) -> Expr:
    """Replace every m-derivative by its u-jet expansion m^(k) = u^(k) - u^(k+2)."""
    table = {}
    for v in jet_vars(e):
        if v.base == "m":
            table[v] = sub(Var(JetVar("u", v.dx, v.dt)), Var(JetVar("u", v.dx + 2, v.dt)))
    return substitute(e, table) if table else e


def to_m_jet(e: Expr) -> Expr:
    """Eliminate u_xx and higher via u^(k) = u^(k-2) - m^(k-2), repeatedly."""
    while True:
        table = {}
        for v in jet_vars(e):
            if v.base == "u" and v.dx >= 2:
                table[v] = sub(Var(JetVar("u", v.dx - 2, v.dt)), Var(JetVar("m", v.dx - 2, v.dt)))
        if not table:
            return e
        e = substitute(e, table)


# ---------------------------------------------------------------------------
# spatial Euler operators


def _euler(e: Expr, base_dt: int) -> Expr:
    eu = to_u_jet(e)
    kmax = max((v.dx for v in jet_vars(eu) if v.base == "u" and v.dt == base_dt), default=-1)
    total = ZERO
    for k in range(kmax + 1):
        term = diff(eu, JetVar("u", k, base_dt))
        if isinstance(term, Const) and term.value == 0.0:
            continue
        for _ in range(k):
            term = _dx_u(term)
        total = add(total, term) if k % 2 == 0 else sub(total, term)
    return to_m_jet(total)


def euler_u(e: Expr) -> Expr:
    """Spatial Euler operator with respect to u: sum_k (-D_x)^k d/du^(k).

    Annihilates exactly the total x-derivatives among expressions of the
    jet variables; computed in the pure u-jet and mapped back.
    """
    return _euler(e, 0)


def euler_ut(e: Expr) -> Expr:
    """Spatial Euler operator with respect to u_t."""
    return _euler(e, 1)


# ---------------------------------------------------------------------------
# exact polynomial normal form (used as a fast/exact zero test when available)

# a polynomial is a dict: monomial -> Fraction, monomial = sorted tuple of
# (symbol_name, exponent) pairs

_PolyT = dict


def _pmul(p: _PolyT, q: _PolyT) -> _PolyT:
    out: _PolyT = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            powers: dict[str, int] = dict(m1)
            for s, k in m2:
                powers[s] = powers.get(s, 0) + k
            key = tuple(sorted((s, k) for s, k in powers.items() if k))
            c = out.get(key, Fraction(0)) + c1 * c2
            if c:
                out[key] = c
            elif key in out:
                del out[key]
    return out


def _padd(p: _PolyT, q: _PolyT) -> _PolyT:
    out = dict(p)
    for m, c in q.items():
        s = out.get(m, Fraction(0)) + c
        if s:
            out[m] = s
        elif m in out:
            del out[m]
    return out


def poly_normal_form(e: Expr) -> _PolyT | None:
    """Expand to an exact multivariate polynomial over the rationals.

    Returns None when the expression is not polynomial in the jet
    variables and parameters (negative/fractional powers of non-constant
    bases, elementary functions of non-constant arguments).
    """
    if isinstance(e, Const):
        c = Fraction(e.value)
        return {(): c} if c else {}
    if isinstance(e, Param):
        return {((e.name, 1),): Fraction(1)}
    if isinstance(e, Var):
        return {((e.v.name, 1),): Fraction(1)}
    if isinstance(e, Add):
        out: _PolyT = {}
        for t in e.terms:
            p = poly_normal_form(t)
            if p is None:
                return None
            out = _padd(out, p)
        return out
    if isinstance(e, Mul):
        out = {(): Fraction(1)}
        for f in e.factors:
            p = poly_normal_form(f)
            if p is None:
                return None
            out = _pmul(out, p)
        return out
    if isinstance(e, Pow):
        p = poly_normal_form(e.base)
        if p is None:
            return None
        if len(p) == 0:
            if e.exp > 0:
                return {}
            return None
        if len(p) == 1 and next(iter(p)) == ():
            # constant base: fold exactly when the power stays rational
            c = p[()]
            if e.exp.denominator == 1:
                k = e.exp.numerator
                return {(): c**k} if c or k > 0 else None
            return None
        if e.exp.denominator != 1 or e.exp < 0:
            return None
        out = {(): Fraction(1)}
        for _ in range(e.exp.numerator):
            out = _pmul(out, p)
        return out
    if isinstance(e, Fn):
        return None
    raise ExprError(f"cannot expand {type(e).__name__}")  # pragma: no cover


# ---------------------------------------------------------------------------
# randomized zero testing


@dataclass(frozen=True)
class SamplingPolicy:
    """How to sample jet points for the randomized zero test.

    Values are drawn from +/-[low, high]; points with |u| < delta,
    |ux| < delta or |u^2 - ux^2| < delta are rejected (the classified
    equation families have poles exactly on those loci), as are points
    where the expression fails to evaluate finitely.
    """

    n_points: int = 20
    low: float = 0.2
    high: float = 2.0
    delta: float = 0.1
    rel_tol: float = 1e-9
    seed: int = 42
    max_tries: int = 400

    def __post_init__(self):
        if self.n_points < 1:
            raise ExprError("n_points must be >= 1")
        if self.rel_tol <= 0:
            raise ExprError("rel_tol must be positive")


@dataclass(frozen=True)
class ZeroVerdict:
    status: str  # "zero" | "nonzero" | "indeterminate"
    residual_max: float
    witness: dict | None = None
    exact: bool = False

    @property
    def is_zero(self) -> bool:
        return self.status == "zero"

    def __bool__(self) -> bool:
        return self.is_zero


def _point_names(e: Expr) -> list[str]:
    names = sorted(v.name for v in jet_vars(e))
    names += sorted(param_names(e))
    return names


def _excluded(point: Mapping[str, float], delta: float) -> bool:
    """Reject points on the singular loci u=0, ux=0, u^2=ux^2.

    Predicates apply only to variables the expression actually contains.
    """
    u = point.get("u")
    ux = point.get("ux")
    if u is not None and abs(u) < delta:
        return True
    if ux is not None and abs(ux) < delta:
        return True
    if u is not None and ux is not None and abs(u * u - ux * ux) < delta:
        return True
    return False


def sample_points(e: Expr, policy: SamplingPolicy) -> list[dict]:
    """Draw admissible points for every symbol of e (deterministic in seed)."""
    names = _point_names(e)
    rng = np.random.default_rng(policy.seed)
    pts: list[dict] = []
    tries = 0
    while len(pts) < policy.n_points:
        if tries >= policy.max_tries * policy.n_points:
            raise SingularSamplingError(
                "could not find admissible sample points "
                f"({len(pts)} of {policy.n_points} after {tries} tries)"
            )
        tries += 1
        vals = rng.uniform(policy.low, policy.high, size=len(names))
        signs = rng.choice([-1.0, 1.0], size=len(names))
        point = dict(zip(names, vals * signs))
        if _excluded(point, policy.delta):
            continue
        val, scale = evaluate_with_scale(e, point)
        if not math.isfinite(val) or not math.isfinite(scale):
            continue
        point["__value__"] = val
        point["__scale__"] = scale
        pts.append(point)
    return pts


def is_zero(e: Expr, policy: SamplingPolicy | None = None) -> ZeroVerdict:
    """Randomized zero test with an exact fast path for polynomial input.

    A point votes "zero" when |value| <= rel_tol * scale with scale the
    largest top-level additive term there (floored at 1).  All points must
    agree; a split vote is reported as indeterminate, never resolved
    silently.
    """
    policy = policy or SamplingPolicy()
    nf = poly_normal_form(e)
    if nf is not None and not nf:
        return ZeroVerdict("zero", 0.0, None, exact=True)
    pts = sample_points(e, policy)
    worst = None
    votes_zero = 0
    res_max = 0.0
    for p in pts:
        rel = abs(p["__value__"]) / p["__scale__"]
        if rel <= policy.rel_tol:
            votes_zero += 1
        if rel >= res_max:
            res_max = rel
            worst = p
    witness = None
    if worst is not None:
        witness = {k: v for k, v in worst.items() if not k.startswith("__")}
        witness["value"] = worst["__value__"]
        witness["scale"] = worst["__scale__"]
    if votes_zero == len(pts):
        return ZeroVerdict("zero", res_max, None)
    if votes_zero == 0:
        return ZeroVerdict("nonzero", res_max, witness)
    return ZeroVerdict("indeterminate", res_max, witness)


# ---------------------------------------------------------------------------
# parser


class _Lexer:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def _peek_char(self):
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def next_token(self) -> tuple[str, str, int]:
        while self._peek_char().isspace():
            self.pos += 1
        start = self.pos
        ch = self._peek_char()
        if not ch:
            return ("eof", "", start)
        if ch in "+-*/^()":
            self.pos += 1
            return (ch, ch, start)
        if ch.isdigit() or ch == ".":
            j = self.pos
            seen_dot = False
            while j < len(self.src) and (self.src[j].isdigit() or (self.src[j] == "." and not seen_dot)):
                seen_dot = seen_dot or self.src[j] == "."
                j += 1
            if j < len(self.src) and self.src[j] in "eE":
                k = j + 1
                if k < len(self.src) and self.src[k] in "+-":
                    k += 1
                if k < len(self.src) and self.src[k].isdigit():
                    while k < len(self.src) and self.src[k].isdigit():
                        k += 1
                    j = k
            text = self.src[self.pos:j]
            self.pos = j
            return ("number", text, start)
        if ch.isalpha() or ch == "_":
            j = self.pos
            while j < len(self.src) and (self.src[j].isalnum() or self.src[j] == "_"):
                j += 1
            text = self.src[self.pos:j]
            self.pos = j
            return ("ident", text, start)
        raise ParseError(f"unexpected character {ch!r}", start)


class _Parser:
    """Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' signed_rational)?
    atom   := number | ident | func '(' expr ')' | '(' expr ')'
    """

    def __init__(self, src: str, params: frozenset):
        self.lex = _Lexer(src)
        self.params = params
        self.tok = self.lex.next_token()

    def _advance(self):
        self.tok = self.lex.next_token()

    def _expect(self, kind: str):
        if self.tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {self.tok[1]!r}", self.tok[2])
        t = self.tok
        self._advance()
        return t

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "eof":
            raise ParseError(f"unexpected trailing input {self.tok[1]!r}", self.tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok[0] in ("+", "-"):
            op = self.tok[0]
            self._advance()
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok[0] in ("*", "/"):
            op = self.tok[0]
            pos = self.tok[2]
            self._advance()
            rhs = self.factor()
            if op == "*":
                e = mul(e, rhs)
            else:
                if isinstance(rhs, Const) and rhs.value == 0.0:
                    raise ParseError("division by zero", pos)
                e = div(e, rhs)
        return e

    def factor(self) -> Expr:
        if self.tok[0] == "-":
            self._advance()
            return neg(self.factor())
        a = self.atom()
        if self.tok[0] == "^":
            self._advance()
            r = self.signed_rational()
            if isinstance(a, Const) and a.value == 0.0 and r < 0:
                raise ParseError("zero raised to a negative power", self.tok[2])
            a = pow_(a, r)
        return a

    def signed_rational(self) -> Fraction:
        if self.tok[0] == "number":
            text, pos = self.tok[1], self.tok[2]
            self._advance()
            if not text.lstrip("+-").isdigit():
                raise ParseError(f"malformed exponent {text!r}", pos)
            return Fraction(int(text))
        if self.tok[0] == "-":
            self._advance()
            return -self.signed_rational()
        if self.tok[0] == "(":
            self._advance()
            num = self._int()
            self._expect("/")
            den = self._int()
            if den == 0:
                raise ParseError("zero-denominator exponent", self.tok[2])
            self._expect(")")
            return Fraction(num, den)
        raise ParseError(f"malformed exponent near {self.tok[1]!r}", self.tok[2])

    def _int(self) -> int:
        sign = 1
        if self.tok[0] == "-":
            sign = -1
            self._advance()
        text, pos = self._expect("number")[1], self.tok[2]
        if not text.isdigit():
            raise ParseError(f"expected integer, found {text!r}", pos)
        return sign * int(text)

    def atom(self) -> Expr:
        kind, text, pos = self.tok
        if kind == "number":
            self._advance()
            try:
                return Const(float(text))
            except ValueError:
                raise ParseError(f"bad number literal {text!r}", pos) from None
        if kind == "(":
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        if kind == "ident":
            self._advance()
            if text in FN_NAMES:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return fn(text, arg)
            if text in _PARSE_VARS:
                return Var(_PARSE_VARS[text])
            if text in self.params:
                return Param(text)
            raise ParseError(f"undeclared identifier {text!r}", pos)
        raise ParseError(f"expected an operand, found {text!r}", pos)


def parse(source: str, declared_params: Iterable[str] = ()) -> Expr:
    """Parse a source string into an Expr.

    Identifiers are the canonical jet variables (u, ux, m, mx, mxx, ut,
    utx, mt, mtx, mtxx, x, t) and any declared parameter names.
    """
    return _Parser(source, frozenset(declared_params)).parse()


# ---------------------------------------------------------------------------
# printer (emits the same grammar the parser accepts)


def _fmt_const(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _print(e: Expr, prec: int) -> str:
    # precedence levels: 0 sum, 1 product, 2 unary/power operand, 3 atom
    if isinstance(e, Const):
        s = _fmt_const(e.value)
        need = 2 if (e.value < 0 or "e" in s or "E" in s) else 3
        return f"({s})" if prec > need and e.value < 0 else s
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Var):
        return e.v.name
    if isinstance(e, Fn):
        return f"{e.name}({_print(e.arg, 0)})"
    if isinstance(e, Pow):
        b = _print(e.base, 3)
        if e.exp.denominator == 1:
            s = f"{b}^{e.exp.numerator}"
        else:
            s = f"{b}^({e.exp.numerator}/{e.exp.denominator})"
        return f"({s})" if prec > 2 else s
    if isinstance(e, Mul):
        num, den = [], []
        for f in e.factors:
            if isinstance(f, Pow) and f.exp < 0:
                den.append(pow_(f.base, -f.exp))
            else:
                num.append(f)
        lead = ""
        if num and isinstance(num[0], Const) and num[0].value == -1.0 and len(num) > 1:
            lead = "-"
            num = num[1:]
        if not num:
            num = [ONE]
        s = lead + "*".join(_print(f, 2) for f in num)
        for d in den:
            s += "/" + _print(d, 2)
        return f"({s})" if prec > 1 else s
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            txt = _print(t, 1)
            if i == 0:
                parts.append(txt)
            elif txt.startswith("-"):
                parts.append(" - " + txt[1:])
            else:
                parts.append(" + " + txt)
        s = "".join(parts)
        return f"({s})" if prec > 0 else s
    raise ExprError(f"cannot print {type(e).__name__}")  # pragma: no cover


def to_source(e: Expr) -> str:
    """Render to the expression grammar; parse(to_source(e)) evaluates identically."""
    return _print(e, 0)
