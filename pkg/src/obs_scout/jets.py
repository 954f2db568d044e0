"""Truncated multivariate Taylor polynomials ("jets") in the five state variables.

A jet of order K stores the Taylor coefficients ``d^a g / a!`` of a scalar
function about an evaluation point, for every multi-index ``a`` of total
degree <= K.  Coefficients live in a dense vector whose monomial ordering is
graded, so the coefficient vector of a lower order is a prefix of the higher
one and truncation is a slice.

The elementary functions (``sin``, ``cos``, ``sqrt``, ``atan2``) accept either
floats/arrays or jets, so measurement and vector-field formulas are written
once and evaluated both ways.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np

NVARS = 5
DEFAULT_ORDER = 5


class JetOrderError(ValueError):
    """Raised when a derivative would need more Taylor orders than the jet carries."""


@functools.lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of total degree <= order, graded then reverse-lexicographic."""
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(NVARS), deg):
            exps = [0] * NVARS
            for v in combo:
                exps[v] += 1
            out.append(tuple(exps))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _index(order: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(monomials(order))}


@functools.lru_cache(maxsize=None)
def _degrees(order: int) -> np.ndarray:
    return np.array([sum(m) for m in monomials(order)])


@functools.lru_cache(maxsize=None)
def _product_table(order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mons = monomials(order)
    index = _index(order)
    ia, ib, ic = [], [], []
    for a, ma in enumerate(mons):
        da = sum(ma)
        for b, mb in enumerate(mons):
            if da + sum(mb) > order:
                continue
            ia.append(a)
            ib.append(b)
            ic.append(index[tuple(x + y for x, y in zip(ma, mb))])
    return np.array(ia), np.array(ib), np.array(ic)


@functools.lru_cache(maxsize=None)
def _partial_table(order: int, var: int) -> tuple[np.ndarray, np.ndarray]:
    # result has order - 1; entry r takes (a_var + 1) * c[a + e_var]
    index = _index(order)
    src, factor = [], []
    for m in monomials(order - 1):
        up = list(m)
        up[var] += 1
        src.append(index[tuple(up)])
        factor.append(m[var] + 1)
    return np.array(src), np.array(factor, dtype=float)


class Jet:
    """Truncated Taylor polynomial in five variables."""

    __slots__ = ("order", "coeffs")
    __array_priority__ = 1000

    def __init__(self, coeffs, order: int):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(monomials(order)),):
            raise ValueError(
                f"order {order} jet needs {len(monomials(order))} coefficients, got {coeffs.shape}"
            )
        self.order = order
        self.coeffs = coeffs

    @classmethod
    def constant(cls, value: float, order: int) -> "Jet":
        c = np.zeros(len(monomials(order)))
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value: float, var: int, order: int) -> "Jet":
        j = cls.constant(value, order)
        if order >= 1:
            j.coeffs[1 + var] = 1.0
        return j

    @classmethod
    def from_dict(cls, terms: dict, order: int) -> "Jet":
        index = _index(order)
        c = np.zeros(len(monomials(order)))
        for m, v in terms.items():
            if sum(m) > order:
                raise ValueError(f"monomial {m} exceeds order {order}")
            c[index[tuple(m)]] = v
        return cls(c, order)

    def value(self) -> float:
        return float(self.coeffs[0])

    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise JetOrderError("gradient of an order-0 jet is not available; raise the seed order")
        return self.coeffs[1 : 1 + NVARS].copy()

    def as_dict(self) -> dict[tuple[int, ...], float]:
        mons = monomials(self.order)
        return {mons[i]: float(v) for i, v in enumerate(self.coeffs) if v != 0.0}

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetOrderError(f"cannot raise jet order from {self.order} to {order}")
        return Jet(self.coeffs[: len(monomials(order))].copy(), order)

    def nilpotent(self) -> "Jet":
        """The jet minus its constant term."""
        c = self.coeffs.copy()
        c[0] = 0.0
        return Jet(c, self.order)

    def partial(self, var: int) -> "Jet":
        if self.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet; raise the seed order")
        src, factor = _partial_table(self.order, var)
        return Jet(self.coeffs[src] * factor, self.order - 1)

    # arithmetic

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError(f"jet order mismatch: {self.order} vs {other.order}")
            return other
        return Jet.constant(float(other), self.order)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.coeffs + other.coeffs, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return Jet(self.coeffs - other.coeffs, self.order)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Jet(-self.coeffs, self.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * float(other), self.order)
        other = self._coerce(other)
        ia, ib, ic = _product_table(self.order)
        out = np.bincount(
            ic, weights=self.coeffs[ia] * other.coeffs[ib], minlength=len(self.coeffs)
        )
        return Jet(out, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / float(other), self.order)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * float(other)

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Jet.constant(1.0, self.order)
        for _ in range(int(n)):
            out = out * self
        return out

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, value={self.value():.6g})"


def _compose(u: Jet, derivs) -> Jet:
    """Sum_k derivs[k]/k! * (u - u0)^k, with derivs[k] = f^(k)(u0)."""
    du = u.nilpotent()
    out = Jet.constant(derivs[0], u.order)
    power = Jet.constant(1.0, u.order)
    for k in range(1, u.order + 1):
        power = power * du
        out = out + power * (derivs[k] / math.factorial(k))
    return out


def reciprocal(u: Jet) -> Jet:
    u0 = u.value()
    if u0 == 0.0:
        raise ZeroDivisionError("reciprocal of a jet with zero value")
    derivs = [(-1.0) ** k * math.factorial(k) / u0 ** (k + 1) for k in range(u.order + 1)]
    return _compose(u, derivs)


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    s, c = math.sin(x.value()), math.cos(x.value())
    return _compose(x, [(s, c, -s, -c)[k % 4] for k in range(x.order + 1)])


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    s, c = math.sin(x.value()), math.cos(x.value())
    return _compose(x, [(c, -s, -c, s)[k % 4] for k in range(x.order + 1)])


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    x0 = x.value()
    if x0 <= 0.0:
        raise ValueError(f"sqrt of a jet requires a positive value, got {x0}")
    derivs = []
    coef = 1.0
    for k in range(x.order + 1):
        derivs.append(coef * x0 ** (0.5 - k))
        coef *= 0.5 - k
    return _compose(x, derivs)


def atan2(y, x):
    """Four-quadrant arctangent.

    For jets the branch comes from the order-0 values; the variation is the
    angle between (x0, y0) and (x, y), an arctangent of a nilpotent ratio that
    is expanded as a finite odd power series.
    """
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return np.arctan2(y, x)
    if not isinstance(y, Jet):
        y = x._coerce(y)
    if not isinstance(x, Jet):
        x = y._coerce(x)
    x0, y0 = x.value(), y.value()
    if x0 == 0.0 and y0 == 0.0:
        raise ValueError("atan2 of jets is undefined when both values are zero")
    num = y * x0 - x * y0
    den = x * x0 + y * y0
    r = (num / den).nilpotent()
    r2 = r * r
    term = r
    series = Jet.constant(math.atan2(y0, x0), x.order)
    for k in range(x.order // 2 + 1):
        series = series + term * ((-1.0) ** k / (2 * k + 1))
        term = term * r2
    return series


def wrap_angle(a):
    """Wrap to (-pi, pi]. For jets only the constant term is shifted."""
    if isinstance(a, Jet):
        v = a.value()
        return a + (float(wrap_angle(v)) - v)
    a = np.asarray(a, dtype=float)
    w = np.pi - np.mod(np.pi - a, 2.0 * np.pi)
    return float(w) if w.ndim == 0 else w


def seed(state, order: int = DEFAULT_ORDER) -> list[Jet]:
    """Identity-seeded jets: component i has value state[i] and unit slope in variable i."""
    if order < 1:
        raise ValueError("seed order must be >= 1")
    state = np.asarray(state, dtype=float)
    return [Jet.variable(state[i], i, order) for i in range(NVARS)]


def lie(g: Jet, field) -> Jet:
    """Lie derivative sum_i dg/dx_i * field_i, truncated to order g.order - 1."""
    if g.order < 1:
        raise JetOrderError(
            "Lie derivative exhausted the jet order; raise the seed order"
        )
    out_order = g.order - 1
    total = Jet.constant(0.0, out_order)
    for i, f in enumerate(field):
        if isinstance(f, Jet):
            if f.order < out_order:
                raise JetOrderError(
                    f"vector field jet order {f.order} < required {out_order}; raise the seed order"
                )
            f = f.truncate(out_order)
            if not f.coeffs.any():
                continue
        elif f == 0:
            continue
        total = total + g.partial(i) * f
    return total


def gradient(g: Jet) -> np.ndarray:
    return g.gradient()
