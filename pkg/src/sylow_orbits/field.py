"""
Finite fields F_q (q = p^k, p odd) and the cyclotomic ring Z[zeta_p].

Field elements are encoded as integers 0..q-1: the code of the polynomial
c_0 + c_1 x + ... + c_{k-1} x^{k-1} is sum c_i p^i.  All arithmetic helpers
on FieldCtx accept numpy arrays of codes as well as plain ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_Q = 2**16


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


# ---------------------------------------------------------------------------
# polynomials over F_p, as coefficient lists low-to-high

def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, m, p):
    a = _poly_trim(a)
    m = _poly_trim(m)
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = (a[-1] * inv_lead) % p
        shift = len(a) - len(m)
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        a = _poly_trim(a)
    return a


def _has_root(poly, p):
    for x in range(p):
        v = 0
        for c in reversed(poly):
            v = (v * x + c) % p
        if v == 0:
            return True
    return False


def _is_irreducible(poly, p):
    # poly monic of degree k; irreducible iff no monic factor of degree <= k/2
    k = len(poly) - 1
    if k <= 3:
        return not _has_root(poly, p)
    for d in range(1, k // 2 + 1):
        for code in range(p**d):
            f = [(code // p**i) % p for i in range(d)] + [1]
            if not _poly_mod(poly, f, p):
                return False
    return True


def least_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible polynomial of degree k over F_p.

    Coefficients are returned low-to-high (leading 1 included).  The order
    compares coefficients from x^{k-1} down to x^0.
    """
    for code in range(p**k):
        poly = [(code // p**i) % p for i in range(k)] + [1]
        if poly[0] == 0:
            continue
        if _is_irreducible(poly, p):
            return tuple(poly)
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")


# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldCtx:
    """The field F_q with q = p^k.  Immutable; build it with make_field."""

    p: int
    k: int
    modulus: tuple[int, ...]
    q: int = field(init=False)

    def __post_init__(self):
        p, k = self.p, self.k
        q = p**k
        object.__setattr__(self, "q", q)
        digits = np.array([[(c // p**i) % p for i in range(k)] for c in range(q)], dtype=np.int64)
        weights = p ** np.arange(k, dtype=np.int64)
        object.__setattr__(self, "_digits", digits)
        object.__setattr__(self, "_weights", weights)

        # multiplication of polynomial codes, used only to build the tables
        def polymul(a, b):
            da, db = digits[a], digits[b]
            prod = [0] * (2 * k - 1)
            for i in range(k):
                if da[i]:
                    for j in range(k):
                        prod[i + j] += int(da[i]) * int(db[j])
            prod = [c % p for c in prod]
            r = _poly_mod(prod, self.modulus, p) if k > 1 else prod[:1]
            r = list(r) + [0] * (k - len(r))
            return sum(int(c) * p**i for i, c in enumerate(r[:k]))

        gen = None
        for g in range(1, q):
            x, order = g, 1
            while x != 1:
                x = polymul(x, g)
                order += 1
            if order == q - 1:
                gen = g
                break
        assert gen is not None
        exp = np.zeros(2 * (q - 1), dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for e in range(q - 1):
            exp[e] = x
            log[x] = e
            x = polymul(x, gen)
        exp[q - 1:] = exp[: q - 1]
        assert (log[1:] >= 0).all(), "exp/log tables are not mutually inverse"
        object.__setattr__(self, "primitive", gen)
        object.__setattr__(self, "_exp", exp)
        object.__setattr__(self, "_log", log)

        neg = ((-digits) % p) @ weights
        object.__setattr__(self, "_neg", neg)
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exp[(-log[1:]) % (q - 1)]
        object.__setattr__(self, "_inv", inv)

        # Frobenius x -> x^p via logs, then Tr(x) = sum of conjugates
        tr = np.zeros(q, dtype=np.int64)
        conj = np.arange(q, dtype=np.int64)
        for _ in range(k):
            tr = self.add(tr, conj)
            conj = self._pow_p(conj)
        assert (tr < p).all(), "trace must land in the prime field"
        object.__setattr__(self, "_trace", tr)
        object.__setattr__(self, "half", int(self.inv(2)))

    # -- scalar/array arithmetic ---------------------------------------------

    def _pow_p(self, a):
        a = np.asarray(a, dtype=np.int64)
        out = np.zeros_like(a)
        nz = a != 0
        out[nz] = self._exp[(self._log[a[nz]] * self.p) % (self.q - 1)]
        return out

    def add(self, a, b):
        if self.k == 1:
            return (np.asarray(a) + b) % self.p
        da = self._digits[np.asarray(a)]
        db = self._digits[np.asarray(b)]
        return ((da + db) % self.p) @ self._weights

    def neg(self, a):
        return self._neg[np.asarray(a)] if self.k > 1 else (-np.asarray(a)) % self.p

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.k == 1:
            return (np.asarray(a) * b) % self.p
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        a, b = np.broadcast_arrays(a, b)
        out = np.zeros(a.shape, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        out[nz] = self._exp[self._log[a[nz]] + self._log[b[nz]]]
        return out if out.ndim else int(out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if (a == 0).any():
            raise ZeroDivisionError("0 has no inverse in F_q")
        r = self._inv[a]
        return r if r.ndim else int(r)

    def trace(self, a):
        r = self._trace[np.asarray(a, dtype=np.int64)]
        return r if r.ndim else int(r)

    def from_int(self, n: int) -> int:
        """Image of the integer n in the prime subfield."""
        return n % self.p

    def scalar(self, a):
        """Normalize an int scalar (possibly negative) into a field code."""
        return int(a) % self.p if self.k == 1 else int(a)

    def sum(self, a, axis=-1):
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return a.sum(axis=axis) % self.p
        d = self._digits[a].sum(axis=axis if axis >= 0 else axis - 1) % self.p
        return d @ self._weights

    def matmul(self, a, b):
        """Matrix product over F_q; batched over leading axes like np.matmul."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return np.matmul(a, b) % self.p
        if a.ndim == 1:
            return self.matmul(a[None], b)[..., 0, :]
        if b.ndim == 1:
            return self.matmul(a, b[:, None])[..., 0]
        n = a.shape[-1]
        out = None
        for t in range(n):
            term = self.mul(a[..., :, t, None], b[..., None, t, :])
            out = term if out is None else self.add(out, term)
        return out

    def elements(self) -> range:
        return range(self.q)

    def __repr__(self):
        if self.k == 1:
            return f"FieldCtx(F_{self.p})"
        return f"FieldCtx(F_{self.q}, modulus={list(self.modulus)})"

    def __reduce__(self):
        return (make_field, (self.p, self.k))

    # -- serialization -------------------------------------------------------

    def to_json(self, a: int):
        """Prime-field elements are bare ints, others coefficient lists low-to-high."""
        if self.k == 1:
            return int(a)
        return [int(c) for c in self._digits[int(a)]]

    def from_json(self, v) -> int:
        if isinstance(v, (list, tuple)):
            if len(v) != self.k:
                raise FieldError(f"expected {self.k} coefficients, got {len(v)}")
            return int(sum((int(c) % self.p) * self.p**i for i, c in enumerate(v)))
        v = int(v)
        if self.k == 1:
            return v % self.p
        if not 0 <= v < self.p:
            raise FieldError(f"bare integer {v} is not a prime-field element")
        return v


@lru_cache(maxsize=None)
def _make_field_cached(p: int, k: int) -> FieldCtx:
    modulus = least_irreducible(p, k) if k > 1 else (0, 1)
    return FieldCtx(p, k, modulus)


def make_field(p: int, k: int = 1, max_q: int = DEFAULT_MAX_Q) -> FieldCtx:
    if p == 2:
        raise FieldError("p must be odd")
    if not is_prime(p):
        raise FieldError(f"p must be prime, got {p}")
    if p % 2 == 0:
        raise FieldError("p must be odd")
    if k < 1:
        raise FieldError(f"extension degree must be >= 1, got {k}")
    if p**k > max_q:
        raise FieldError(f"q = {p}^{k} exceeds the bound {max_q}")
    return _make_field_cached(p, k)


class FieldElem:
    """Convenience wrapper around a field code, with operator overloading."""

    __slots__ = ("ctx", "value")

    def __init__(self, ctx: FieldCtx, value):
        self.ctx = ctx
        self.value = int(value) % ctx.q if ctx.k == 1 else int(value)
        if not 0 <= self.value < ctx.q:
            raise FieldError(f"code {value} out of range for {ctx}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.ctx is not self.ctx:
                raise FieldError("elements of different fields")
            return other.value
        return self.ctx.from_int(int(other))

    def __add__(self, other):
        return FieldElem(self.ctx, self.ctx.add(self.value, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElem(self.ctx, self.ctx.sub(self.value, self._coerce(other)))

    def __rsub__(self, other):
        return FieldElem(self.ctx, self.ctx.sub(self._coerce(other), self.value))

    def __mul__(self, other):
        return FieldElem(self.ctx, self.ctx.mul(self.value, self._coerce(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(self.ctx, self.ctx.neg(self.value))

    def inverse(self):
        return FieldElem(self.ctx, self.ctx.inv(self.value))

    def __truediv__(self, other):
        return self * FieldElem(self.ctx, self._coerce(other)).inverse()

    def __pow__(self, e: int):
        r = FieldElem(self.ctx, 1)
        b = self if e >= 0 else self.inverse()
        for _ in range(abs(e)):
            r = r * b
        return r

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.ctx is other.ctx and self.value == other.value
        if isinstance(other, int):
            return self.value == self.ctx.from_int(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx.p, self.ctx.k, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElem({self.ctx.to_json(self.value)})"


def trace(x: FieldElem) -> FieldElem:
    """Absolute trace F_q -> F_p, x + x^p + ... + x^{p^{k-1}}."""
    return FieldElem(x.ctx, x.ctx.trace(x.value))


# ---------------------------------------------------------------------------
# Z[zeta_p]

class CycNum:
    """Exact element of Q(zeta_p) in the basis 1, zeta, ..., zeta^{p-2}.

    Coefficients are ints, or Fractions once a division was not exact.
    Two CycNums are equal iff their coefficient vectors agree.
    """

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Sequence):
        if len(coeffs) == p:
            top = coeffs[p - 1]
            coeffs = [c - top for c in coeffs[: p - 1]]
        elif len(coeffs) != p - 1:
            raise ValueError(f"need {p - 1} or {p} coefficients, got {len(coeffs)}")
        self.p = p
        self.coeffs = tuple(_norm_number(c) for c in coeffs)

    @classmethod
    def zero(cls, p):
        return cls(p, [0] * (p - 1))

    @classmethod
    def integer(cls, p, n):
        return cls(p, [n] + [0] * (p - 2))

    @classmethod
    def zeta(cls, p, t=1):
        v = [0] * p
        v[t % p] = 1
        return cls(p, v)

    @classmethod
    def from_exponent_counts(cls, p, counts: Iterable):
        """sum_t counts[t] * zeta^t."""
        counts = [int(c) if not isinstance(c, Fraction) else c for c in counts]
        if len(counts) != p:
            raise ValueError("need one count per residue mod p")
        return cls(p, counts)

    def full(self) -> list:
        """Coefficients on zeta^0..zeta^{p-1} with the last one zero."""
        return list(self.coeffs) + [0]

    def _check(self, other):
        if isinstance(other, int):
            return CycNum.integer(self.p, other)
        if isinstance(other, Fraction):
            return CycNum(self.p, [other] + [0] * (self.p - 2))
        if not isinstance(other, CycNum) or other.p != self.p:
            raise TypeError("incompatible cyclotomic numbers")
        return other

    def __add__(self, other):
        other = self._check(other)
        return CycNum(self.p, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycNum(self.p, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        p = self.p
        prod = [0] * p
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        prod[(i + j) % p] += a * b
        return CycNum(p, prod)

    __rmul__ = __mul__

    def __truediv__(self, n):
        if not isinstance(n, int) or n == 0:
            raise TypeError("CycNum only divides by nonzero integers")
        return CycNum(self.p, [Fraction(a, n) for a in self.coeffs])

    def conj(self):
        p = self.p
        v = [0] * p
        for t, a in enumerate(self.coeffs):
            v[(-t) % p] += a
        return CycNum(p, v)

    def is_integer(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:]) and _is_int(self.coeffs[0])

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def to_int(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self} is not a rational integer")
        return int(self.coeffs[0])

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._check(other)
        if not isinstance(other, CycNum):
            return NotImplemented
        return self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def to_json(self):
        return [c if isinstance(c, int) else f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    def __repr__(self):
        terms = []
        for t, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if t == 0 else f"{c}*z^{t}")
        return "CycNum(" + (" + ".join(terms) or "0") + f"; p={self.p})"


def _is_int(c) -> bool:
    return isinstance(c, int) or (isinstance(c, Fraction) and c.denominator == 1)


def _norm_number(c):
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else c
    return int(c)


def theta(x: FieldElem, scale: int = 1) -> CycNum:
    """The additive character x -> zeta_p^{scale * Tr(x)}."""
    if scale % x.ctx.p == 0:
        raise FieldError("theta must be non-trivial")
    return CycNum.zeta(x.ctx.p, scale * x.ctx.trace(x.value))


def theta_exponent(ctx: FieldCtx, x, scale: int = 1):
    """Exponent t in F_p with theta(x) = zeta^t (array-friendly)."""
    return (scale * np.asarray(ctx.trace(x))) % ctx.p
