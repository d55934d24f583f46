"""Exact coefficient arithmetic: Gaussian rationals and a big-float complex bridge.

All formal series in this package carry coefficients in Q(i), represented
exactly by :class:`GaussianRational` on top of gmpy2 rationals.  Nothing in
the exact pipeline ever rounds.  The numeric side (mirror constants such as
xi = exp(pi*i/h), quadrature) lives in :class:`BigComplex`, a thin wrapper
over mpmath with an explicit precision in bits.
"""

from __future__ import annotations

from typing import Union

import mpmath
from gmpy2 import mpq

QLike = Union[int, str, "mpq"]

MPQ_T = type(mpq(0))


class GaussianRational:
    """An element re + im*i of Q(i) with exact rational parts.

    Values are immutable and all operations are pure, so instances are safe
    to share freely.  Division by zero raises ZeroDivisionError.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: QLike = 0, im: QLike = 0):
        object.__setattr__(self, "re", mpq(re))
        object.__setattr__(self, "im", mpq(im))

    def __setattr__(self, *a):
        raise AttributeError("GaussianRational is immutable")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def of(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        return GaussianRational(x)

    @staticmethod
    def from_ratio(num: int, den: int, inum: int = 0, iden: int = 1) -> "GaussianRational":
        return GaussianRational(mpq(num, den), mpq(inum, iden))

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_rational(self) -> bool:
        return not self.im

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.of(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = GaussianRational.of(other)
        a, b, c, d = self.re, self.im, o.re, o.im
        if not b and not d:
            return GaussianRational(a * c, 0)
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> mpq:
        """|x|^2 = re^2 + im^2, an exact rational."""
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if not n:
            raise ZeroDivisionError("inverse of zero in Q(i)")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * GaussianRational.of(other).inverse()

    def __rtruediv__(self, other):
        return GaussianRational.of(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("pow is defined for integer exponents only")
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = GR_ONE
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, MPQ_T)):
            return self.re == other and not self.im
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        return f"({self.re} + {self.im}*i)"

    # -- serialization -----------------------------------------------------

    def to_json(self):
        """Canonical encoding {"re": [num, den], "im": [num, den]} with decimal strings."""
        return {
            "re": [str(self.re.numerator), str(self.re.denominator)],
            "im": [str(self.im.numerator), str(self.im.denominator)],
        }

    @staticmethod
    def from_json(d) -> "GaussianRational":
        re = mpq(int(d["re"][0]), int(d["re"][1]))
        im = mpq(int(d["im"][0]), int(d["im"][1]))
        return GaussianRational(re, im)


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)
GR_HALF = GaussianRational(mpq(1, 2))


def grat(re, im=0) -> GaussianRational:
    return GaussianRational(re, im)


def double_factorial(n: int) -> mpq:
    """Signed double factorial (2k-1)!! for odd n = 2k-1, any integer k.

    For k >= 0 this is the usual product 1*3*...*(2k-1) with (-1)!! = 1.
    For k < 0 it extends by (2k-1)!! := (-1)^k / (2|k|-1)!!, which is the
    unique extension satisfying (2k+1)!! = (2k+1)*(2k-1)!! for all k and
    matches Gamma(k+1/2)/sqrt(pi) = (2k-1)!!/2^k on the half-integers.
    """
    if n % 2 == 0:
        raise ValueError(f"double_factorial requires an odd argument, got {n}")
    k = (n + 1) // 2
    if k >= 0:
        out = 1
        for j in range(1, k + 1):
            out *= 2 * j - 1
        return mpq(out)
    m = -k
    out = 1
    for j in range(1, m + 1):
        out *= 2 * j - 1
    return mpq((-1) ** m, out)


def factorial(n: int) -> int:
    if n < 0:
        raise ValueError("factorial of negative integer")
    out = 1
    for j in range(2, n + 1):
        out *= j
    return out


def binomial_mpq(r: mpq, n: int) -> mpq:
    """Generalized binomial coefficient C(r, n) for rational r, integer n >= 0."""
    if n < 0:
        raise ValueError("binomial lower index must be >= 0")
    out = mpq(1)
    for j in range(n):
        out = out * (r - j) / (j + 1)
    return out


# ---------------------------------------------------------------------------
# BigComplex: arbitrary-precision complex floats (numeric bridge)
# ---------------------------------------------------------------------------

DEFAULT_PRECISION = 512


class BigComplex:
    """Arbitrary-precision complex number with explicit binary precision.

    Thin immutable wrapper over mpmath; arithmetic propagates the maximum
    precision of the operands.  Conversions from GaussianRational are exact
    up to the final rounding at the stated precision.
    """

    __slots__ = ("value", "prec")

    def __init__(self, re=0, im=0, prec: int = DEFAULT_PRECISION, _value=None):
        object.__setattr__(self, "prec", int(prec))
        if _value is not None:
            object.__setattr__(self, "value", _value)
            return
        with mpmath.workprec(self.prec):
            if isinstance(re, GaussianRational):
                v = mpmath.mpc(mpmath.mpf(re.re.numerator) / mpmath.mpf(re.re.denominator),
                               mpmath.mpf(re.im.numerator) / mpmath.mpf(re.im.denominator))
            else:
                if isinstance(re, MPQ_T):
                    re = mpmath.mpf(re.numerator) / mpmath.mpf(re.denominator)
                if isinstance(im, MPQ_T):
                    im = mpmath.mpf(im.numerator) / mpmath.mpf(im.denominator)
                v = mpmath.mpc(re, im)
            object.__setattr__(self, "value", v)

    def __setattr__(self, *a):
        raise AttributeError("BigComplex is immutable")

    @property
    def re(self):
        return self.value.real

    @property
    def im(self):
        return self.value.imag

    @staticmethod
    def of(x, prec: int = DEFAULT_PRECISION) -> "BigComplex":
        if isinstance(x, BigComplex):
            return x
        return BigComplex(x, prec=prec)

    def _binop(self, other, fn):
        o = BigComplex.of(other, self.prec)
        prec = max(self.prec, o.prec)
        with mpmath.workprec(prec):
            return BigComplex(prec=prec, _value=fn(self.value, o.value))

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return BigComplex.of(other, self.prec) - self

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return BigComplex.of(other, self.prec) / self

    def __neg__(self):
        return BigComplex(prec=self.prec, _value=-self.value)

    def __pow__(self, k):
        with mpmath.workprec(self.prec):
            if isinstance(k, BigComplex):
                return BigComplex(prec=max(self.prec, k.prec), _value=self.value ** k.value)
            return BigComplex(prec=self.prec, _value=self.value ** k)

    def conj(self):
        with mpmath.workprec(self.prec):
            return BigComplex(prec=self.prec, _value=mpmath.conj(self.value))

    def abs(self):
        with mpmath.workprec(self.prec):
            return mpmath.fabs(self.value)

    def sqrt(self):
        with mpmath.workprec(self.prec):
            return BigComplex(prec=self.prec, _value=mpmath.sqrt(self.value))

    def __repr__(self):
        return f"BigComplex({self.value}, prec={self.prec})"

    def to_json(self):
        with mpmath.workprec(self.prec):
            return {"re": mpmath.nstr(self.value.real, int(self.prec / 3.2)),
                    "im": mpmath.nstr(self.value.imag, int(self.prec / 3.2)),
                    "prec": self.prec}


def big_exp_i_pi(ratio: mpq, prec: int = DEFAULT_PRECISION) -> BigComplex:
    """exp(i*pi*ratio) at the requested precision, ratio an exact rational."""
    with mpmath.workprec(prec):
        t = mpmath.pi * mpmath.mpf(ratio.numerator) / mpmath.mpf(ratio.denominator)
        return BigComplex(prec=prec, _value=mpmath.mpc(mpmath.cos(t), mpmath.sin(t)))
