"""Exact arithmetic over the Gaussian rationals Q(i).

Scalars are sympy ``QQ_I`` elements, polynomials live in ``PolyRing = QQ_I[z]`` and
rational functions are kept in canonical reduced form (monic denominator, coprime parts).
Local expansions use the coordinate ``z - p`` at finite points and ``w = 1/z`` at infinity.
"""
import math
import re
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational
from sympy.polys.rings import PolyElement, ring

from ..core.errors import ExactMathError

K = QQ_I
PolyRing, Z = ring("z", K)

Scalar = GaussianRational
Polynomial = PolyElement
ZERO: Scalar = K.zero
ONE: Scalar = K.one
IMAG_UNIT: Scalar = K(0, 1)

INFINITE_ORDER = math.inf

ScalarLike = Union[Scalar, int, str]

_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


# ---------------------------------------------------------------------------
# scalars


def _parse_rational(text: str):
    match = _RATIONAL_RE.match(text)
    if not match:
        raise ExactMathError(f"malformed rational {text!r}")
    num = int(match.group(1))
    den = int(match.group(2)) if match.group(2) else 1
    if den == 0:
        raise ExactMathError(f"zero denominator in {text!r}")
    return QQ(num, den)


def parse_scalar(text: str) -> Scalar:
    """Parses "a", "a/b", "a/b+c/d*i", "3/4*i", "i" or "-i" into an exact scalar."""
    s = text.replace(" ", "")
    if not s:
        raise ExactMathError("empty scalar string")
    if not s.endswith("i"):
        return K(_parse_rational(s), 0)
    body = s[:-1]
    split = max(body.rfind("+"), body.rfind("-"))
    if split > 0:
        real_text, imag_text = body[:split], body[split:]
    else:
        real_text, imag_text = "0", body
    if imag_text.endswith("*"):
        imag_text = imag_text[:-1]
    if imag_text in ("", "+"):
        imag = QQ(1)
    elif imag_text == "-":
        imag = QQ(-1)
    else:
        imag = _parse_rational(imag_text)
    return K(_parse_rational(real_text), imag)


def _format_rational(q) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_scalar(c: Scalar) -> str:
    """Canonical string: "a/b", "a/b+c/d*i" or "c/d*i"; parse_scalar inverts it exactly."""
    re_part, im_part = c.x, c.y
    if not im_part:
        return _format_rational(re_part)
    if not re_part:
        return f"{_format_rational(im_part)}*i"
    sign = "+" if im_part > 0 else "-"
    return f"{_format_rational(re_part)}{sign}{_format_rational(abs(im_part))}*i"


def scalar(value: Any) -> Scalar:
    """Coerces ints, strings and domain elements into Q(i)."""
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, str):
        return parse_scalar(value)
    if isinstance(value, bool):
        raise ExactMathError("booleans are not scalars")
    try:
        return K.convert(value)
    except Exception as exc:  # sympy raises CoercionFailed
        raise ExactMathError(f"cannot convert {value!r} to an exact scalar") from exc


def conjugate(c: Scalar) -> Scalar:
    return K(c.x, -c.y)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class Point:
    """A point of the sphere: a finite coordinate value, or infinity when ``value`` is None."""

    value: Optional[Scalar] = None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def sort_key(self) -> Tuple:
        if self.value is None:
            return (1,)
        return (0, self.value.x, self.value.y)

    def __str__(self) -> str:
        return format_point(self)


INFINITY = Point(None)


def point(value: Any) -> Point:
    if isinstance(value, Point):
        return value
    if isinstance(value, str):
        return parse_point(value)
    return Point(scalar(value))


def parse_point(text: str) -> Point:
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return INFINITY
    return Point(parse_scalar(text))


def format_point(p: Point) -> str:
    return "inf" if p.is_infinite else format_scalar(p.value)


# ---------------------------------------------------------------------------
# polynomials


def poly_from_coefficients(coefficients: Iterable[Any]) -> Polynomial:
    """Builds a polynomial from coefficients listed lowest degree first."""
    return PolyRing.from_dict({(k,): scalar(c) for k, c in enumerate(coefficients) if c})


def poly_coefficients(p: Polynomial) -> List[Scalar]:
    """Dense coefficient list, lowest degree first; [] for the zero polynomial."""
    if not p:
        return []
    deg = p.degree()
    return [p.get((k,), ZERO) for k in range(deg + 1)]


def taylor_shift(coefficients: Sequence[Scalar], a: Scalar) -> List[Scalar]:
    """Coefficients of p(a + t) given those of p(z)."""
    c = list(coefficients)
    if not a:
        return c
    n = len(c)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            c[j] = c[j] + a * c[j + 1]
    return c


def linear_factor(p: Point) -> Polynomial:
    return Z - p.value


def strip_point(poly: Polynomial, p: Point) -> Tuple[Polynomial, int]:
    """Divides out (z - p) as often as possible; returns the cofactor and the multiplicity."""
    count = 0
    factor = linear_factor(p)
    while poly and poly.degree() > 0 and not poly.evaluate(Z, p.value):
        poly = poly.exquo(factor)
        count += 1
    return poly, count


# ---------------------------------------------------------------------------
# rational functions


def _as_poly(value: Any) -> Polynomial:
    if isinstance(value, PolyElement):
        return value
    return PolyRing.from_dict({(0,): scalar(value)}) if value else PolyRing.zero


class RationalFunction:
    """Canonical p(z)/q(z) with q monic and gcd(p, q) = 1; immutable and hashable."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Any, den: Any = None, *, reduced: bool = False):
        num = _as_poly(num)
        den = PolyRing.one if den is None else _as_poly(den)
        if not den:
            raise ExactMathError("rational function with zero denominator")
        if not reduced:
            if not num:
                den = PolyRing.one
            else:
                if den.degree() > 0:
                    _, num, den = num.cofactors(den)
                lc = den.LC
                if lc != ONE:
                    num = num.quo_ground(lc)
                    den = den.monic()
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    # constructors

    @classmethod
    def constant(cls, c: Any) -> "RationalFunction":
        return cls(_as_poly(c), reduced=True)

    @classmethod
    def monomial(cls, k: int, c: Any = 1) -> "RationalFunction":
        """c * z**k for any integer k."""
        c = scalar(c)
        if k >= 0:
            return cls(PolyRing.from_dict({(k,): c}), reduced=True)
        return cls(PolyRing.from_dict({(0,): c}), PolyRing.from_dict({(-k,): ONE}), reduced=bool(c))

    @classmethod
    def pole(cls, p: Point, k: int) -> "RationalFunction":
        """(z - p)**(-k) at a finite point, z**k at infinity."""
        if p.is_infinite:
            return cls.monomial(k)
        return cls(PolyRing.one, linear_factor(p) ** k, reduced=True)

    @classmethod
    def from_coefficients(cls, num: Sequence[Any], den: Sequence[Any] = (1,)) -> "RationalFunction":
        return cls(poly_from_coefficients(num), poly_from_coefficients(den))

    # accessors

    @property
    def numerator(self) -> Polynomial:
        return self.num

    @property
    def denominator(self) -> Polynomial:
        return self.den

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree() <= 0

    @property
    def is_constant(self) -> bool:
        return self.is_polynomial and self.num.degree() <= 0

    def constant_value(self) -> Scalar:
        if not self.is_constant:
            raise ExactMathError(f"{self} is not constant")
        return self.num.get((0,), ZERO)

    def __bool__(self) -> bool:
        return bool(self.num)

    # arithmetic

    @staticmethod
    def _coerce(other: Any) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, PolyElement):
            return RationalFunction(other, reduced=True)
        return RationalFunction.constant(other)

    def __add__(self, other: Any) -> "RationalFunction":
        other = self._coerce(other)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, reduced=True)

    def __sub__(self, other: Any) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "RationalFunction":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "RationalFunction":
        if not isinstance(other, (RationalFunction, PolyElement)):
            c = scalar(other)
            return RationalFunction(self.num * c, self.den, reduced=bool(c))
        other = self._coerce(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "RationalFunction":
        other = self._coerce(other)
        if other.is_zero:
            raise ExactMathError("division by the zero function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other: Any) -> "RationalFunction":
        return self._coerce(other) / self

    def __pow__(self, k: int) -> "RationalFunction":
        if k >= 0:
            return RationalFunction(self.num ** k, self.den ** k, reduced=True)
        if self.is_zero:
            raise ExactMathError("negative power of the zero function")
        return RationalFunction(self.den ** (-k), self.num ** (-k))

    def derivative(self) -> "RationalFunction":
        if self.is_polynomial:
            return RationalFunction(self.num.diff(Z), reduced=True)
        return RationalFunction(self.num.diff(Z) * self.den - self.num * self.den.diff(Z), self.den ** 2)

    def __call__(self, value: Any) -> Scalar:
        a = scalar(value)
        d = self.den.evaluate(Z, a)
        if not d:
            raise ExactMathError(f"{self} has a pole at {format_scalar(a)}")
        return self.num.evaluate(Z, a) / d

    # comparison

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, RationalFunction):
            try:
                other = self._coerce(other)
            except ExactMathError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((frozenset(self.num.items()), frozenset(self.den.items())))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        return f"RationalFunction({format_rf(self)!r})"

    def __str__(self) -> str:
        return format_rf(self)


ZERO_RF = RationalFunction.constant(0)
ONE_RF = RationalFunction.constant(1)
Z_RF = RationalFunction.monomial(1)

ArithmeticOp = Literal["add", "sub", "mul", "div"]


def rf_arithmetic(a: RationalFunction, b: RationalFunction, op: ArithmeticOp) -> RationalFunction:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ExactMathError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# string forms


def _format_coefficient(c: Scalar) -> str:
    return f"({format_scalar(c)})"


def format_poly(p: Polynomial) -> str:
    """Terms from high to low degree, e.g. "z^2 + (-1/2+i)*z + (3)"."""
    if not p:
        return "0"
    terms = []
    for k in range(p.degree(), -1, -1):
        c = p.get((k,), ZERO)
        if not c:
            continue
        if k == 0:
            terms.append(_format_coefficient(c))
            continue
        mono = "z" if k == 1 else f"z^{k}"
        terms.append(mono if c == ONE else f"{_format_coefficient(c)}*{mono}")
    return " + ".join(terms)


def format_rf(f: RationalFunction) -> str:
    if f.is_polynomial:
        return format_poly(f.num)
    return f"({format_poly(f.num)})/({format_poly(f.den)})"


_TERM_RE = re.compile(r"^(?:\((?P<c>[^()]*)\))?(?:\*)?(?:(?P<z>z)(?:\^(?P<k>\d+))?)?$")


def parse_poly(text: str) -> Polynomial:
    text = text.strip()
    if text == "0":
        return PolyRing.zero
    coeffs: Dict[Tuple[int], Scalar] = {}
    for raw in text.split(" + "):
        match = _TERM_RE.match(raw.strip())
        if not match or (match.group("c") is None and match.group("z") is None):
            raise ExactMathError(f"malformed polynomial term {raw!r}")
        c = parse_scalar(match.group("c")) if match.group("c") is not None else ONE
        k = 0 if match.group("z") is None else int(match.group("k") or 1)
        coeffs[(k,)] = coeffs.get((k,), ZERO) + c
    return PolyRing.from_dict(coeffs)


def _split_quotient(text: str) -> Optional[Tuple[str, str]]:
    depth = 0
    for idx, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            return text[:idx], text[idx + 1:]
    return None


def _unwrap(text: str) -> str:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        depth = 0
        for idx, ch in enumerate(text):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0 and idx < len(text) - 1:
                return text
        return text[1:-1]
    return text


def parse_rf(text: str) -> RationalFunction:
    """Inverse of format_rf."""
    parts = _split_quotient(text.strip())
    if parts is None:
        return RationalFunction(parse_poly(text))
    num, den = (_unwrap(p) for p in parts)
    return RationalFunction(parse_poly(num), parse_poly(den))


# ---------------------------------------------------------------------------
# local expansions


class _Series:
    """Lazily extended expansion of a nonzero rational function at one point."""

    __slots__ = ("order", "_num", "_den", "_inv", "_coeffs", "_lock")

    def __init__(self, f: RationalFunction, p: Point):
        if p.is_infinite:
            num = list(reversed(poly_coefficients(f.num)))
            den = list(reversed(poly_coefficients(f.den)))
            order = f.den.degree() - f.num.degree()
        else:
            num = taylor_shift(poly_coefficients(f.num), p.value)
            den = taylor_shift(poly_coefficients(f.den), p.value)
            vn = next(i for i, c in enumerate(num) if c)
            vd = next(i for i, c in enumerate(den) if c)
            num, den = num[vn:], den[vd:]
            order = vn - vd
        self.order = order
        self._num = num
        self._den = den
        self._inv = ONE / den[0]
        self._coeffs: List[Scalar] = []
        self._lock = threading.Lock()

    def _extend(self, count: int) -> None:
        c, num, den, inv = self._coeffs, self._num, self._den, self._inv
        while len(c) < count:
            k = len(c)
            acc = num[k] if k < len(num) else ZERO
            for j in range(1, min(k, len(den) - 1) + 1):
                if den[j]:
                    acc = acc - den[j] * c[k - j]
            c.append(acc * inv)

    def coefficient(self, k: int) -> Scalar:
        j = k - self.order
        if j < 0:
            return ZERO
        if j >= len(self._coeffs):
            with self._lock:
                self._extend(j + 1)
        return self._coeffs[j]


@lru_cache(maxsize=200_000)
def _series(f: RationalFunction, p: Point) -> _Series:
    return _Series(f, p)


def coefficient(f: RationalFunction, p: Point, k: int) -> Scalar:
    """Coefficient of order k of f in the local coordinate at p."""
    if f.is_zero:
        return ZERO
    return _series(f, p).coefficient(k)


def ord_at(f: RationalFunction, p: Point) -> Union[int, float]:
    """Vanishing order at p (negative for poles); INFINITE_ORDER for the zero function."""
    if f.is_zero:
        return INFINITE_ORDER
    if p.is_infinite:
        return f.den.degree() - f.num.degree()
    return _series(f, p).order


def local_order(f: RationalFunction, p: Point, weight: int = 0) -> Union[int, float]:
    """Order of f (dz)^weight at p; at infinity dz = -w^{-2} dw shifts it by -2*weight."""
    order = ord_at(f, p)
    if p.is_infinite and order != INFINITE_ORDER:
        return order - 2 * weight
    return order


def local_coefficient(f: RationalFunction, p: Point, k: int, weight: int = 0) -> Scalar:
    """Coefficient of order k of the local representative of f (dz)^weight."""
    if not p.is_infinite or weight == 0:
        return coefficient(f, p, k)
    c = coefficient(f, p, k + 2 * weight)
    return -c if weight % 2 else c


def residue_at(f: RationalFunction, p: Point) -> Scalar:
    """Residue of the one-form f dz at p."""
    return local_coefficient(f, p, -1, weight=1)


@dataclass(frozen=True)
class LaurentJet:
    """Coefficients at orders min_order..max_order; scalar or matrix valued.

    ``truncated`` marks jets whose window starts above the true order; products of such
    jets are not determined and are refused.
    """

    base_point: Point
    min_order: int
    max_order: int
    coefficients: Tuple[Any, ...]
    truncated: bool = False

    def __post_init__(self):
        if self.max_order < self.min_order:
            raise ExactMathError("jet window is empty")
        if len(self.coefficients) != self.max_order - self.min_order + 1:
            raise ExactMathError("jet coefficient count does not match its window")

    def __getitem__(self, k: int) -> Any:
        if k < self.min_order:
            if self.truncated:
                raise ExactMathError(f"order {k} lies below a truncated jet")
            return self.coefficients[0] - self.coefficients[0]
        if k > self.max_order:
            raise ExactMathError(f"order {k} lies above the jet window (max {self.max_order})")
        return self.coefficients[k - self.min_order]

    def items(self):
        return zip(range(self.min_order, self.max_order + 1), self.coefficients)

    def leading_order(self) -> Union[int, float]:
        for k, c in self.items():
            if c:
                return k
        return INFINITE_ORDER

    def _check(self, other: "LaurentJet") -> None:
        if self.base_point != other.base_point:
            raise ExactMathError("jets expanded at different points")

    def __add__(self, other: "LaurentJet") -> "LaurentJet":
        self._check(other)
        if (self.truncated or other.truncated) and self.min_order != other.min_order:
            raise ExactMathError("cannot align truncated jets")
        lo = min(self.min_order, other.min_order)
        hi = min(self.max_order, other.max_order)
        coeffs = tuple(self[k] + other[k] for k in range(lo, hi + 1))
        return LaurentJet(self.base_point, lo, hi, coeffs, self.truncated or other.truncated)

    def __neg__(self) -> "LaurentJet":
        return LaurentJet(self.base_point, self.min_order, self.max_order,
                          tuple(-c for c in self.coefficients), self.truncated)

    def __sub__(self, other: "LaurentJet") -> "LaurentJet":
        return self + (-other)

    def scale(self, c: Any) -> "LaurentJet":
        return LaurentJet(self.base_point, self.min_order, self.max_order,
                          tuple(x * c for x in self.coefficients), self.truncated)

    def __mul__(self, other: "LaurentJet") -> "LaurentJet":
        if not isinstance(other, LaurentJet):
            return self.scale(other)
        self._check(other)
        if self.truncated or other.truncated:
            raise ExactMathError("product of truncated jets is undetermined")
        lo = self.min_order + other.min_order
        hi = min(self.max_order + other.min_order, self.min_order + other.max_order)
        coeffs = []
        for h in range(lo, hi + 1):
            acc = None
            for i in range(self.min_order, h - other.min_order + 1):
                term = self[i] * other[h - i]
                acc = term if acc is None else acc + term
            coeffs.append(acc)
        return LaurentJet(self.base_point, lo, hi, tuple(coeffs))

    def derivative(self) -> "LaurentJet":
        """Jet of d/dt in the local coordinate t (finite points only)."""
        if self.base_point.is_infinite:
            raise ExactMathError("use the w-chart derivative explicitly at infinity")
        lo, hi = self.min_order - 1, self.max_order - 1
        coeffs = tuple(self[k + 1] * (k + 1) for k in range(lo, hi + 1))
        return LaurentJet(self.base_point, lo, hi, coeffs, self.truncated)


def laurent_expand(f: RationalFunction, p: Point, min_order: int, max_order: int, weight: int = 0) -> LaurentJet:
    if max_order < min_order:
        raise ExactMathError("max_order must not be below min_order")
    coeffs = tuple(local_coefficient(f, p, k, weight) for k in range(min_order, max_order + 1))
    truncated = local_order(f, p, weight) < min_order
    return LaurentJet(p, min_order, max_order, coeffs, bool(truncated))


def finite_poles_outside(f: RationalFunction, allowed: Iterable[Point]) -> bool:
    """True when f has a finite pole at a point not listed in ``allowed``."""
    den = f.den
    for p in allowed:
        if not p.is_infinite and den.degree() > 0:
            den, _ = strip_point(den, p)
    return den.degree() > 0


def residue_sum(f: RationalFunction, points: Iterable[Point]) -> Scalar:
    total = ZERO
    for p in points:
        total = total + residue_at(f, p)
    return total
