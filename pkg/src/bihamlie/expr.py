"""Exact scalar ring over group coordinates.

An :class:`Expression` is a finite sum of terms

    q * (parameter Laurent monomial) * x^n * exp(lambda x) * trig(mu x)

with ``q`` rational.  Coordinates are named ``x1, x2, ...``; every other
identifier is a parameter symbol.  Trig products are linearized eagerly so
the term dictionary is a canonical form and zero testing is complete.
"""

from __future__ import annotations

import ast
import math
import re
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping

__all__ = [
    "Expression",
    "RationalExpression",
    "ExpressionError",
    "UnboundSymbolError",
    "NonlinearityError",
    "parse",
    "add",
    "mul",
    "partial",
    "evaluate",
    "exact_value",
    "is_zero",
    "collect_linear",
    "substitute",
    "to_fraction",
]

_COORD_RE = re.compile(r"^x(\d+)$")
_ONE_F = Fraction(1)
_HALF = Fraction(1, 2)
_EMPTY_BASIS = ((), (), ())


class ExpressionError(ValueError):
    """Malformed input or an operation leaving the ring."""


class UnboundSymbolError(ExpressionError):
    def __init__(self, name: str):
        super().__init__(f"unbound symbol: {name}")
        self.name = name


class NonlinearityError(ExpressionError):
    pass


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("bool is not a rational")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    raise TypeError(f"not a rational: {v!r}")


# ---------------------------------------------------------------- basis keys
#
# mono : ((i, n), ...)          n >= 1, i ascending
# expo : ((i, lam), ...)        lam != 0 Fraction
# trig : ((i, kind, mu), ...)   kind in "cs", mu > 0
# params: ((name, n), ...)      n != 0, name ascending


def _merge_int(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, v in b:
        n = d.get(k, 0) + v
        if n:
            d[k] = n
        else:
            del d[k]
    return tuple(sorted(d.items()))


@lru_cache(maxsize=None)
def _pmul(a, b):
    return _merge_int(a, b)


def _merge_exp(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, v in b:
        s = d.get(k, 0) + v
        if s:
            d[k] = s
        else:
            del d[k]
    return tuple(sorted(d.items()))


def _trig_norm(kind, nu):
    """Return (factor or None, sign) for trig(nu x); None means the factor is 1."""
    if nu == 0:
        return (None, 1) if kind == "c" else (None, 0)
    if nu < 0:
        return (kind, -nu), (1 if kind == "c" else -1)
    return (kind, nu), 1


def _trig_pair(k1, m1, k2, m2):
    """Linearize trig1(m1 x) * trig2(m2 x) -> list of ((kind, mu) | None, coeff)."""
    if k1 == "c" and k2 == "c":
        parts = (("c", m1 - m2, _HALF), ("c", m1 + m2, _HALF))
    elif k1 == "s" and k2 == "s":
        parts = (("c", m1 - m2, _HALF), ("c", m1 + m2, -_HALF))
    elif k1 == "s":
        parts = (("s", m1 + m2, _HALF), ("s", m1 - m2, _HALF))
    else:
        parts = (("s", m1 + m2, _HALF), ("s", m2 - m1, _HALF))
    acc: dict = {}
    for kind, nu, c in parts:
        fac, sgn = _trig_norm(kind, nu)
        if sgn == 0:
            continue
        acc[fac] = acc.get(fac, 0) + sgn * c
    return [(f, c) for f, c in acc.items() if c]


@lru_cache(maxsize=None)
def _bmul(b1, b2):
    """Product of two basis keys as a tuple of (basis, coefficient)."""
    m1, e1, t1 = b1
    m2, e2, t2 = b2
    mono = _merge_int(m1, m2)
    expo = _merge_exp(e1, e2)
    if not t1 or not t2:
        return (((mono, expo, t1 or t2), _ONE_F),)
    d1 = {i: (k, mu) for i, k, mu in t1}
    d2 = {i: (k, mu) for i, k, mu in t2}
    options = []
    for i in sorted(set(d1) | set(d2)):
        if i in d1 and i in d2:
            opts = _trig_pair(*d1[i], *d2[i])
            options.append([(i, f, c) for f, c in opts])
        else:
            f = d1.get(i) or d2.get(i)
            options.append([(i, f, _ONE_F)])
    out: dict = {}
    for combo in product(*options):
        coeff = _ONE_F
        trig = []
        for i, f, c in combo:
            coeff *= c
            if f is not None:
                trig.append((i, f[0], f[1]))
        key = (mono, expo, tuple(trig))
        out[key] = out.get(key, 0) + coeff
    return tuple((k, v) for k, v in out.items() if v)


# ---------------------------------------------------------------- Expression


class Expression:
    """Immutable canonical sum of terms; see the module docstring."""

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Mapping | None = None):
        # terms: {(basis, params): Fraction} with no zero values
        object.__setattr__(self, "_t", dict(terms) if terms else {})
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _raw(cls, d: dict) -> "Expression":
        e = object.__new__(cls)
        object.__setattr__(e, "_t", d)
        object.__setattr__(e, "_hash", None)
        return e

    def __setattr__(self, k, v):
        raise AttributeError("Expression is immutable")

    # -- constructors
    @classmethod
    def const(cls, q) -> "Expression":
        q = to_fraction(q)
        return cls._raw({(_EMPTY_BASIS, ()): q} if q else {})

    @classmethod
    def coord(cls, i: int, power: int = 1) -> "Expression":
        _check_index(i)
        if power < 0:
            raise ExpressionError("negative coordinate power")
        mono = ((i, power),) if power else ()
        return cls._raw({((mono, (), ()), ()): _ONE_F})

    @classmethod
    def symbol(cls, name: str, power: int = 1) -> "Expression":
        if _COORD_RE.match(name):
            return cls.coord(int(name[1:]), power)
        if not name.isidentifier():
            raise ExpressionError(f"bad symbol name {name!r}")
        params = ((name, power),) if power else ()
        return cls._raw({(_EMPTY_BASIS, params): _ONE_F})

    @classmethod
    def exp(cls, i: int, lam=1) -> "Expression":
        _check_index(i)
        lam = to_fraction(lam)
        expo = ((i, lam),) if lam else ()
        return cls._raw({(((), expo, ()), ()): _ONE_F})

    @classmethod
    def sin(cls, i: int, mu=1) -> "Expression":
        _check_index(i)
        fac, sgn = _trig_norm("s", to_fraction(mu))
        if sgn == 0:
            return cls()
        return cls._raw({(((), (), ((i,) + fac,)), ()): Fraction(sgn)})

    @classmethod
    def cos(cls, i: int, mu=1) -> "Expression":
        _check_index(i)
        fac, _ = _trig_norm("c", to_fraction(mu))
        if fac is None:
            return cls.const(1)
        return cls._raw({(((), (), ((i,) + fac,)), ()): _ONE_F})

    # -- inspection
    @property
    def terms(self) -> dict:
        """Read-only view ``{(basis, params): coeff}``."""
        return dict(self._t)

    def __len__(self) -> int:
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def is_constant(self) -> bool:
        """True when no coordinate dependence is present."""
        return all(b == _EMPTY_BASIS for b, _ in self._t)

    def is_rational(self) -> bool:
        return not self._t or (len(self._t) == 1 and next(iter(self._t)) == (_EMPTY_BASIS, ()))

    def as_fraction(self) -> Fraction:
        if not self._t:
            return Fraction(0)
        if not self.is_rational():
            raise ExpressionError(f"not a rational constant: {self}")
        return next(iter(self._t.values()))

    def is_unit(self) -> bool:
        """Single term without coordinate monomial or trig factor."""
        if len(self._t) != 1:
            return False
        (mono, _, trig), _ = next(iter(self._t))
        return not mono and not trig

    def coordinates(self) -> set[int]:
        out = set()
        for (mono, expo, trig), _ in self._t:
            out.update(i for i, _ in mono)
            out.update(i for i, _ in expo)
            out.update(i for i, _, _ in trig)
        return out

    def symbols(self) -> set[str]:
        return {n for (_, params) in self._t for n, _ in params}

    def is_polynomial_in_x(self) -> bool:
        return all(not e and not t for (_, e, t), _ in self._t)

    # -- arithmetic
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other._t:
            return self
        if not self._t:
            return other
        d = dict(self._t)
        for k, v in other._t.items():
            s = d.get(k)
            if s is None:
                d[k] = v
            else:
                s += v
                if s:
                    d[k] = s
                else:
                    del d[k]
        return Expression._raw(d)

    __radd__ = __add__

    def __neg__(self):
        return Expression._raw({k: -v for k, v in self._t.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return Expression()
            return Expression._raw({k: v * other for k, v in self._t.items()})
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not self._t or not other._t:
            return Expression()
        d: dict = {}
        get = d.get
        for (b1, p1), c1 in self._t.items():
            for (b2, p2), c2 in other._t.items():
                params = _pmul(p1, p2)
                c = c1 * c2
                if not b1[2] or not b2[2]:
                    b = (_merge_int(b1[0], b2[0]), _merge_exp(b1[1], b2[1]), b1[2] or b2[2])
                    key = (b, params)
                    d[key] = get(key, 0) + c
                else:
                    for b, f in _bmul(b1, b2):
                        key = (b, params)
                        d[key] = get(key, 0) + c * f
        return Expression._raw({k: v for k, v in d.items() if v})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or isinstance(n, bool):
            return NotImplemented
        if n < 0:
            return self.unit_inverse() ** (-n)
        result = Expression.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def unit_inverse(self) -> "Expression":
        """Inverse of a unit (rational x parameter monomial x exponential)."""
        if not self.is_unit():
            raise ExpressionError(f"cannot invert non-unit {self}")
        ((mono, expo, trig), params), c = next(iter(self._t.items()))
        b = ((), tuple((i, -l) for i, l in expo), ())
        return Expression._raw({(b, tuple((n, -k) for n, k in params)): 1 / c})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.unit_inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other * self.unit_inverse()

    def __eq__(self, other):
        if isinstance(other, Expression):
            return self._t == other._t
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._t == o._t

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(frozenset(self._t.items()))
            object.__setattr__(self, "_hash", h)
        return h

    def __bool__(self):
        return bool(self._t)

    # -- calculus
    def diff(self, i: int) -> "Expression":
        return partial(self, i)

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Expression({render(self)!r})"


def _check_index(i):
    if not isinstance(i, int) or i < 1:
        raise ExpressionError(f"coordinate index must be >= 1, got {i!r}")


def _coerce(v):
    if isinstance(v, Expression):
        return v
    if isinstance(v, bool):
        return NotImplemented
    if isinstance(v, (int, Fraction)):
        return Expression.const(v)
    return NotImplemented


def _as_expr(v) -> Expression:
    if isinstance(v, Expression):
        return v
    if isinstance(v, str):
        return parse(v)
    return Expression.const(v)


# ---------------------------------------------------------------- operations


def add(a: Expression, b: Expression) -> Expression:
    return _as_expr(a) + _as_expr(b)


def mul(a: Expression, b: Expression) -> Expression:
    return _as_expr(a) * _as_expr(b)


def is_zero(a: Expression) -> bool:
    return _as_expr(a).is_zero()


def partial(a: Expression, i: int) -> Expression:
    """Exact derivative with respect to the coordinate ``x_i``."""
    _check_index(i)
    d: dict = {}
    for ((mono, expo, trig), params), c in a._t.items():
        # monomial factor
        for k, (j, n) in enumerate(mono):
            if j == i:
                nm = mono[:k] + (((j, n - 1),) if n > 1 else ()) + mono[k + 1:]
                key = ((nm, expo, trig), params)
                d[key] = d.get(key, 0) + c * n
                break
        for j, lam in expo:
            if j == i:
                key = ((mono, expo, trig), params)
                d[key] = d.get(key, 0) + c * lam
                break
        for k, (j, kind, mu) in enumerate(trig):
            if j == i:
                nt = trig[:k] + ((j, "c" if kind == "s" else "s", mu),) + trig[k + 1:]
                key = ((mono, expo, nt), params)
                d[key] = d.get(key, 0) + (c * mu if kind == "s" else -c * mu)
                break
    return Expression._raw({k: v for k, v in d.items() if v})


def _lookup_point(point, i):
    if i in point:
        return point[i]
    name = f"x{i}"
    if name in point:
        return point[name]
    raise UnboundSymbolError(name)


def evaluate(a: Expression, point: Mapping | None = None, symbols: Mapping | None = None) -> float:
    """Floating-point value with coordinates and parameters bound.

    ``point`` maps coordinate indices (or names ``"x3"``) to numbers;
    ``symbols`` maps parameter names to numbers.
    """
    a = _as_expr(a)
    point = point or {}
    symbols = symbols or {}
    total = 0.0
    for ((mono, expo, trig), params), c in a._t.items():
        v = float(c)
        for n, k in params:
            if n not in symbols:
                raise UnboundSymbolError(n)
            v *= float(symbols[n]) ** k
        for i, n in mono:
            v *= float(_lookup_point(point, i)) ** n
        arg = 0.0
        for i, lam in expo:
            arg += float(lam) * float(_lookup_point(point, i))
        if arg:
            v *= math.exp(arg)
        for i, kind, mu in trig:
            t = float(mu) * float(_lookup_point(point, i))
            v *= math.sin(t) if kind == "s" else math.cos(t)
        total += v
    return total


def exact_value(a: Expression, point: Mapping | None = None, symbols: Mapping | None = None) -> Fraction:
    """Exact rational value; raises if a transcendental factor has a nonzero argument."""
    a = _as_expr(a)
    point = point or {}
    symbols = symbols or {}
    total = Fraction(0)
    for ((mono, expo, trig), params), c in a._t.items():
        v = c
        for n, k in params:
            if n not in symbols:
                raise UnboundSymbolError(n)
            v *= to_fraction(symbols[n]) ** k
        for i, n in mono:
            v *= to_fraction(_lookup_point(point, i)) ** n
        for i, lam in expo:
            if to_fraction(_lookup_point(point, i)) != 0:
                raise ExpressionError("exponential factor has no exact rational value")
        for i, kind, mu in trig:
            if to_fraction(_lookup_point(point, i)) != 0:
                raise ExpressionError("trig factor has no exact rational value")
            if kind == "s":
                v = Fraction(0)
        total += v
    return total


def substitute(a: Expression, values: Mapping) -> Expression:
    """Replace parameter symbols by Expressions or rationals.

    Coordinates may be replaced too (keys ``"x3"`` or integers) as long as
    no exp/trig factor depends on them.  A symbol raised to a negative power
    can only be replaced by a unit.
    """
    a = _as_expr(a)
    if not values:
        return a
    pvals = {}
    cvals = {}
    for k, v in values.items():
        if isinstance(k, int):
            cvals[k] = _as_expr(v)
        elif _COORD_RE.match(k):
            cvals[int(k[1:])] = _as_expr(v)
        else:
            pvals[k] = _as_expr(v)
    cache: dict = {}

    def power(name, val, n):
        key = (name, n)
        if key not in cache:
            cache[key] = val ** n
        return cache[key]

    out = Expression()
    pieces: dict = {}
    for ((mono, expo, trig), params), c in a._t.items():
        keep_p = []
        factor = None
        for n, k in params:
            if n in pvals:
                f = power(n, pvals[n], k)
                factor = f if factor is None else factor * f
            else:
                keep_p.append((n, k))
        keep_m = []
        for i, n in mono:
            if i in cvals:
                f = power(f"x{i}", cvals[i], n)
                factor = f if factor is None else factor * f
            else:
                keep_m.append((i, n))
        for i, _ in expo:
            if i in cvals:
                raise ExpressionError("cannot substitute inside an exponential")
        for i, _, _ in trig:
            if i in cvals:
                raise ExpressionError("cannot substitute inside a trig factor")
        rest = Expression._raw({((tuple(keep_m), expo, trig), tuple(keep_p)): c})
        if factor is None:
            pieces[((tuple(keep_m), expo, trig), tuple(keep_p))] = c
        else:
            out = out + rest * factor
    if pieces:
        out = out + Expression._raw(pieces)
    return out


def collect_linear(a: Expression, unknowns: Iterable[str]) -> dict:
    """Group ``a`` by basis function and split each coefficient over unknowns.

    Returns ``{basis: {unknown | None: coefficient}}`` where ``basis`` is an
    Expression holding a single basis function (coefficient 1, no parameters),
    ``None`` keys the unknown-free part and every coefficient is an
    Expression free of unknowns.
    """
    a = _as_expr(a)
    unk = set(unknowns)
    groups: dict = {}
    for (b, params), c in a._t.items():
        u = None
        rest = []
        for n, k in params:
            if n in unk:
                if u is not None or k != 1:
                    raise NonlinearityError(f"term is not affine in the unknowns: {n}^{k}")
                u = n
            else:
                rest.append((n, k))
        form = groups.setdefault(b, {})
        form.setdefault(u, {})[(_EMPTY_BASIS, tuple(rest))] = c
    out = {}
    for b in sorted(groups, key=_basis_sort_key):
        be = Expression._raw({(b, ()): _ONE_F})
        out[be] = {u: Expression._raw(d) for u, d in groups[b].items()}
    return out


# ---------------------------------------------------------------- rendering


def _basis_sort_key(b):
    mono, expo, trig = b
    return (
        sum(n for _, n in mono),
        tuple((i, -n) for i, n in mono),
        len(expo),
        tuple(expo),
        len(trig),
        tuple(trig),
    )


def _term_sort_key(key):
    b, params = key
    return (_basis_sort_key(b), tuple((n, -k) for n, k in params))


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_scaled(q: Fraction, var: str) -> str:
    if q == 1:
        return var
    if q == -1:
        return f"-{var}"
    if q.denominator == 1:
        return f"{q.numerator}*{var}"
    return f"{q.numerator}*{var}/{q.denominator}"


def _render_term(key, c: Fraction) -> tuple[str, bool]:
    (mono, expo, trig), params = key
    num = []
    den = []
    for n, k in params:
        (num if k > 0 else den).append(n if abs(k) == 1 else f"{n}**{abs(k)}")
    for i, n in mono:
        num.append(f"x{i}" if n == 1 else f"x{i}**{n}")
    for i, lam in expo:
        num.append(f"exp({_fmt_scaled(lam, f'x{i}')})")
    for i, kind, mu in trig:
        fn = "sin" if kind == "s" else "cos"
        num.append(f"{fn}({_fmt_scaled(mu, f'x{i}')})")
    neg = c < 0
    c = abs(c)
    if c.numerator != 1 or not num:
        num.insert(0, str(c.numerator))
    if c.denominator != 1:
        den.insert(0, str(c.denominator))
    s = "*".join(num)
    if den:
        s += "/" + (den[0] if len(den) == 1 else "(" + "*".join(den) + ")")
    return s, neg


def render(a: Expression) -> str:
    """Deterministic, re-parseable text form."""
    a = _as_expr(a)
    if not a._t:
        return "0"
    parts = []
    for key in sorted(a._t, key=_term_sort_key):
        s, neg = _render_term(key, a._t[key])
        if not parts:
            parts.append(f"-{s}" if neg else s)
        else:
            parts.append(f" - {s}" if neg else f" + {s}")
    return "".join(parts)


# ---------------------------------------------------------------- parsing

_FUNCS = {"exp", "sin", "cos"}


def parse(text: str, bindings: Mapping | None = None) -> Expression:
    """Parse arithmetic text into an Expression.

    Names ``x1, x2, ...`` are coordinates, other identifiers are parameter
    symbols unless bound in ``bindings`` (name -> rational or Expression).
    ``^`` is accepted as a power operator.  Division is allowed only by
    units of the ring.
    """
    if isinstance(text, Expression):
        return text if not bindings else substitute(text, bindings)
    if isinstance(text, (int, Fraction)):
        return Expression.const(text)
    src = str(text).replace("^", "**").replace("'", "p")
    try:
        tree = ast.parse(src.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    bind = {k: _as_expr(v) for k, v in (bindings or {}).items()}
    return _Builder(bind, text).visit(tree.body)


class _Builder:
    def __init__(self, bindings, text):
        self.bindings = bindings
        self.text = text

    def fail(self, msg):
        raise ExpressionError(f"cannot parse {self.text!r}: {msg}")

    def visit(self, node) -> Expression:
        if isinstance(node, ast.BinOp):
            left = self.visit(node.left)
            op = node.op
            if isinstance(op, ast.Pow):
                n = self.visit(node.right)
                if not n.is_rational() or n.as_fraction().denominator != 1:
                    self.fail("exponent must be an integer")
                k = int(n.as_fraction())
                if k < 0 and not left.is_unit():
                    self.fail("negative power of a non-unit")
                return left ** k
            right = self.visit(node.right)
            if isinstance(op, ast.Add):
                return left + right
            if isinstance(op, ast.Sub):
                return left - right
            if isinstance(op, ast.Mult):
                return left * right
            if isinstance(op, ast.Div):
                if right.is_zero():
                    raise ZeroDivisionError(f"division by zero in {self.text!r}")
                if not right.is_unit():
                    self.fail(f"division by non-unit {render(right)}")
                return left * right.unit_inverse()
            self.fail(f"unsupported operator {type(op).__name__}")
        if isinstance(node, ast.UnaryOp):
            v = self.visit(node.operand)
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.UAdd):
                return v
            self.fail("unsupported unary operator")
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                self.fail(f"unsupported literal {node.value!r}")
            if isinstance(node.value, float):
                return Expression.const(Fraction(repr(node.value)))
            return Expression.const(node.value)
        if isinstance(node, ast.Name):
            name = node.id
            if name in self.bindings:
                return self.bindings[name]
            m = _COORD_RE.match(name)
            if m:
                return Expression.coord(int(m.group(1)))
            return Expression.symbol(name)
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                self.fail("only exp, sin and cos may be called")
            if len(node.args) != 1 or node.keywords:
                self.fail("functions take one argument")
            arg = self.visit(node.args[0])
            return _apply_func(node.func.id, arg, self.fail)
        self.fail(f"unsupported syntax {type(node).__name__}")


def _apply_func(fn: str, arg: Expression, fail) -> Expression:
    if arg.is_zero():
        return Expression.const(0 if fn == "sin" else 1)
    if len(arg) != 1:
        fail(f"{fn} argument must be lambda*x_i")
    ((mono, expo, trig), params), c = next(iter(arg._t.items()))
    if params or expo or trig or len(mono) != 1 or mono[0][1] != 1:
        fail(f"{fn} argument must be lambda*x_i with rational lambda")
    i = mono[0][0]
    if fn == "exp":
        return Expression.exp(i, c)
    if fn == "sin":
        return Expression.sin(i, c)
    return Expression.cos(i, c)


# ---------------------------------------------------------------- fractions


class RationalExpression:
    """Quotient ``num/den`` of Expressions.

    No gcd is taken.  Unit content of the denominator (rational factor,
    parameter monomial, common exponential) is divided out, and a unit
    denominator is folded into the numerator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num = _as_expr(num)
        den = _as_expr(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.is_unit():
            num, den = num * den.unit_inverse(), Expression.const(1)
        else:
            u = _unit_content(den)
            if u is not None:
                inv = u.unit_inverse()
                num, den = num * inv, den * inv
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, k, v):
        raise AttributeError("RationalExpression is immutable")

    @classmethod
    def lift(cls, v) -> "RationalExpression":
        if isinstance(v, RationalExpression):
            return v
        return cls(_as_expr(v))

    def is_polynomial(self) -> bool:
        return self.den.is_rational() and self.den.as_fraction() == 1

    def as_expression(self) -> Expression:
        if not self.is_polynomial():
            raise ExpressionError("denominator is not a unit")
        return self.num

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def __add__(self, other):
        o = _lift(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RationalExpression(self.num + o.num, self.den)
        return RationalExpression(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpression(-self.num, self.den)

    def __sub__(self, other):
        o = _lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = _lift(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = _lift(other)
        if o is NotImplemented:
            return o
        return RationalExpression(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _lift(other)
        if o is NotImplemented:
            return o
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero")
        return RationalExpression(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = _lift(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, n: int):
        if n < 0:
            return (1 / self) ** (-n)
        return RationalExpression(self.num ** n, self.den ** n)

    def __eq__(self, other):
        o = _lift(other)
        if o is NotImplemented:
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        if self.is_polynomial():
            return hash(self.num)
        return hash((RationalExpression, len(self.num), len(self.den)))

    def diff(self, i: int) -> "RationalExpression":
        if self.is_polynomial():
            return RationalExpression(partial(self.num, i))
        n, d = self.num, self.den
        return RationalExpression(partial(n, i) * d - n * partial(d, i), d * d)

    def evaluate(self, point=None, symbols=None) -> float:
        return evaluate(self.num, point, symbols) / evaluate(self.den, point, symbols)

    def exact_value(self, point=None, symbols=None) -> Fraction:
        d = exact_value(self.den, point, symbols)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at this point")
        return exact_value(self.num, point, symbols) / d

    def substitute(self, values: Mapping) -> "RationalExpression":
        return RationalExpression(substitute(self.num, values), substitute(self.den, values))

    def __str__(self):
        if self.is_polynomial():
            return render(self.num)
        return f"({render(self.num)})/({render(self.den)})"

    def __repr__(self):
        return f"RationalExpression({str(self)!r})"


def _lift(v):
    if isinstance(v, RationalExpression):
        return v
    if isinstance(v, Expression):
        return RationalExpression(v)
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return RationalExpression(Expression.const(v))
    return NotImplemented


def _unit_content(e: Expression):
    """Common unit factor of all terms (None when trivial)."""
    items = list(e._t.items())
    if not items:
        return None
    g_num = 0
    l_den = 1
    pmin: dict = {}
    emin: dict = {}
    names = set()
    for (b, params), c in items:
        g_num = math.gcd(g_num, c.numerator)
        l_den = l_den * c.denominator // math.gcd(l_den, c.denominator)
        names.update(n for n, _ in params)
    for n in names:
        pmin[n] = min(dict(params).get(n, 0) for (_, params), _ in items)
    coords = {i for ((_, expo, _), _), _ in items for i, _ in expo}
    for i in coords:
        emin[i] = min(dict(b[1]).get(i, Fraction(0)) for (b, _), _ in items)
    # make the leading term positive
    lead = min(e._t, key=_term_sort_key)
    sign = -1 if e._t[lead] < 0 else 1
    q = Fraction(sign * g_num, l_den)
    params = tuple(sorted((n, k) for n, k in pmin.items() if k))
    expo = tuple(sorted((i, l) for i, l in emin.items() if l))
    if q == 1 and not params and not expo:
        return None
    return Expression._raw({(((), expo, ()), params): q})
