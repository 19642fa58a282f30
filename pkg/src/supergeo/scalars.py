"""Exact Grassmann-valued scalars with rational-function coefficients.

A :class:`Superfunction` is a finite sum of terms ``c(x) * th_{i1}*...*th_{ik}``
where the ``c`` are rational functions of the even variables with rational
coefficients (sympy expressions, kept in cancelled form) and the odd monomial
is a strictly increasing tuple of indices into the pool's odd generators.

Sign conventions, fixed once for the whole package (see
docs/sign-conventions.md):

* odd monomials are normalised to ascending pool order; every product sign is
  the parity of the permutation that merges two sorted index tuples,
* odd partial derivatives act from the left,
* derivatives with respect to flesh generators are rejected: flesh generators
  are constants of the structure sheaf,
* Berezin extraction reads off the coefficient of ``th_1*...*th_m`` taken over
  the odd *coordinates* in ascending order; flesh generators must not survive
  into that coefficient.
"""

from __future__ import annotations

from fractions import Fraction

import sympy as sp

from .errors import (
    FleshInTopCoefficient,
    NonInvertible,
    NotASquare,
    ParityError,
    PoolMismatch,
    UnknownGenerator,
)

_ZERO = sp.Integer(0)


def _can(expr):
    """Canonical form for an even coefficient: cancelled rational function."""
    if isinstance(expr, (int, Fraction)):
        return sp.Rational(expr)
    return sp.cancel(sp.sympify(expr))


def _merge_monomials(a, b):
    """Merge two strictly increasing index tuples.

    Returns ``(sign, merged)``; ``sign`` is 0 when an index repeats
    (nilpotency) and otherwise the Koszul sign of the merge.
    """
    if not a:
        return 1, b
    if not b:
        return 1, a
    sign = 1
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return 0, ()
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] moves past the len(a)-i remaining generators of a
            if (len(a) - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


class GeneratorPool:
    """Ordered even and odd generator names; the odd ones may be flesh.

    The construction order is frozen and defines the monomial normal form.
    """

    def __init__(self, even_names, odd_names, flesh_names=()):
        self.even_names = tuple(even_names)
        self.odd_names = tuple(odd_names) + tuple(flesh_names)
        self.n_coordinate_odd = len(tuple(odd_names))
        all_names = self.even_names + self.odd_names
        if len(set(all_names)) != len(all_names):
            raise ValueError("generator names must be unique")
        self.even_symbols = tuple(sp.Symbol(n) for n in self.even_names)
        self._even_index = {n: k for k, n in enumerate(self.even_names)}
        self._odd_index = {n: k for k, n in enumerate(self.odd_names)}

    @property
    def n_even(self):
        return len(self.even_names)

    @property
    def n_odd(self):
        return len(self.odd_names)

    @property
    def n_flesh(self):
        return self.n_odd - self.n_coordinate_odd

    def is_flesh(self, odd_index: int) -> bool:
        return odd_index >= self.n_coordinate_odd

    def odd_index(self, name: str) -> int:
        try:
            return self._odd_index[name]
        except KeyError:
            raise UnknownGenerator(f"unknown odd generator {name!r}") from None

    def even_symbol(self, name: str):
        try:
            return self.even_symbols[self._even_index[name]]
        except KeyError:
            raise UnknownGenerator(f"unknown even variable {name!r}") from None

    def zero(self) -> "Superfunction":
        return Superfunction(self, {})

    def one(self) -> "Superfunction":
        return self.scalar(1)

    def scalar(self, value) -> "Superfunction":
        """Lift a rational number or even sympy expression into the ring."""
        expr = _can(value)
        if expr == 0:
            return Superfunction(self, {})
        return Superfunction(self, {(): expr})

    def even(self, name: str) -> "Superfunction":
        return self.scalar(self.even_symbol(name))

    def odd(self, name: str) -> "Superfunction":
        return Superfunction(self, {(self.odd_index(name),): sp.Integer(1)})

    def generator(self, name: str) -> "Superfunction":
        if name in self._even_index:
            return self.even(name)
        return self.odd(name)

    def names(self):
        return self.even_names + self.odd_names

    def __eq__(self, other):
        return (
            isinstance(other, GeneratorPool)
            and self.even_names == other.even_names
            and self.odd_names == other.odd_names
            and self.n_coordinate_odd == other.n_coordinate_odd
        )

    def __hash__(self):
        return hash((self.even_names, self.odd_names, self.n_coordinate_odd))

    def __repr__(self):
        return (
            f"GeneratorPool(even={list(self.even_names)}, "
            f"odd={list(self.odd_names[: self.n_coordinate_odd])}, "
            f"flesh={list(self.odd_names[self.n_coordinate_odd :])})"
        )


class Superfunction:
    """Element of the Grassmann algebra over the rational-function field.

    Treated as immutable; all operations return new instances.
    """

    __slots__ = ("pool", "terms")

    def __init__(self, pool: GeneratorPool, terms: dict):
        self.pool = pool
        self.terms = terms  # monomial tuple -> nonzero cancelled sympy expr

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def _from_raw(pool, raw):
        terms = {}
        for mono, expr in raw.items():
            expr = _can(expr)
            if expr != 0:
                terms[mono] = expr
        return Superfunction(pool, terms)

    def _coerce(self, other):
        if isinstance(other, Superfunction):
            if other.pool != self.pool:
                raise PoolMismatch("operands belong to different pools")
            return other
        return self.pool.scalar(other)

    # -- ring structure ------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        raw = dict(self.terms)
        for mono, expr in other.terms.items():
            raw[mono] = raw.get(mono, _ZERO) + expr
        return Superfunction._from_raw(self.pool, raw)

    __radd__ = __add__

    def __neg__(self):
        return Superfunction(self.pool, {m: -e for m, e in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        raw = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                sign, mono = _merge_monomials(ma, mb)
                if sign == 0:
                    continue
                raw[mono] = raw.get(mono, _ZERO) + sign * ca * cb
        return Superfunction._from_raw(self.pool, raw)

    def __rmul__(self, other):
        # only scalars reach here; they commute with everything
        return self._coerce(other) * self

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.invert()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.invert()

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        out = self.pool.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except PoolMismatch:
            return False
        return (self - other).is_zero()

    __hash__ = None

    # -- structure queries ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def body(self):
        """Even-variable rational function left after killing all odd generators."""
        return self.terms.get((), _ZERO)

    def nilpotent_part(self) -> "Superfunction":
        return Superfunction(
            self.pool, {m: e for m, e in self.terms.items() if m}
        )

    def parity(self):
        """0 or 1 when homogeneous (zero counts as even), None when mixed."""
        if not self.terms:
            return 0
        parities = {len(m) % 2 for m in self.terms}
        if len(parities) == 1:
            return parities.pop()
        return None

    def has_parity(self, p: int) -> bool:
        return all(len(m) % 2 == p % 2 for m in self.terms)

    def grassmann_degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def uses_flesh(self) -> bool:
        return any(
            self.pool.is_flesh(i) for mono in self.terms for i in mono
        )

    def even_symbols_used(self):
        used = set()
        for expr in self.terms.values():
            used |= expr.free_symbols
        return used

    # -- calculus ------------------------------------------------------------

    def partial(self, name: str) -> "Superfunction":
        """Partial derivative; odd derivatives act from the left."""
        pool = self.pool
        if name in pool._even_index:
            sym = pool.even_symbol(name)
            raw = {m: sp.diff(e, sym) for m, e in self.terms.items()}
            return Superfunction._from_raw(pool, raw)
        idx = pool.odd_index(name)
        if pool.is_flesh(idx):
            raise UnknownGenerator(
                f"{name!r} is a flesh generator; it admits no derivations"
            )
        raw = {}
        for mono, expr in self.terms.items():
            if idx not in mono:
                continue
            pos = mono.index(idx)
            sign = -1 if pos % 2 else 1
            rest = mono[:pos] + mono[pos + 1 :]
            raw[rest] = raw.get(rest, _ZERO) + sign * expr
        return Superfunction._from_raw(pool, raw)

    def invert(self) -> "Superfunction":
        """Exact inverse via a finite Neumann series in the nilpotent part."""
        b = self.body()
        if b == 0:
            raise NonInvertible("body is zero")
        binv = _can(1 / b)
        n = self.nilpotent_part()
        if n.is_zero():
            return self.pool.scalar(binv)
        t = n * binv  # f = b*(1 + t), t nilpotent, so 1/f = (1/b) * sum (-t)^k
        out = self.pool.one()
        power = self.pool.one()
        sign = 1
        while True:
            power = power * t
            sign = -sign
            if power.is_zero():
                break
            out = out + power * sign
        return out * binv

    def sqrt(self) -> "Superfunction":
        """Unique square root with exactly square body and positive lead."""
        if not self.has_parity(0):
            raise ParityError("square roots are only defined for even elements")
        b = self.body()
        s0 = _rational_function_sqrt(b)
        n = self.nilpotent_part()
        if n.is_zero():
            return self.pool.scalar(s0)
        t = n * _can(1 / b)  # f = b*(1 + t)
        # sqrt(1+t) via the binomial series; terminates by nilpotency
        out = self.pool.one()
        power = self.pool.one()
        coeff = Fraction(1)
        k = 0
        while True:
            power = power * t
            if power.is_zero():
                break
            k += 1
            coeff = coeff * (Fraction(1, 2) - (k - 1)) / k
            out = out + power * sp.Rational(coeff)
        return out * s0

    def berezin_top(self):
        """Coefficient of the full odd-coordinate monomial, as a sympy expr.

        Flesh generators must not appear in that coefficient.
        """
        pool = self.pool
        top = tuple(range(pool.n_coordinate_odd))
        result = _ZERO
        for mono, expr in self.terms.items():
            coords = tuple(i for i in mono if not pool.is_flesh(i))
            if coords != top:
                continue
            if len(coords) != len(mono):
                raise FleshInTopCoefficient(
                    "top odd-coordinate coefficient contains flesh generators"
                )
            result = result + expr
        return _can(result)

    def substitute(self, images: dict, new_pool: GeneratorPool) -> "Superfunction":
        """Graded-safe substitution generator -> Superfunction over new_pool.

        Every generator actually used must have an image of matching parity.
        Even images are expanded in a finite Taylor series around their body.
        """
        used_even = self.even_symbols_used()
        even_images = {}
        for name in self.pool.even_names:
            sym = self.pool.even_symbol(name)
            if sym not in used_even:
                continue
            if name not in images:
                raise UnknownGenerator(f"no image for even variable {name!r}")
            img = images[name]
            if not img.has_parity(0):
                raise ParityError(f"image of even variable {name!r} must be even")
            even_images[name] = img
        odd_images = {}
        for mono in self.terms:
            for idx in mono:
                name = self.pool.odd_names[idx]
                if name in odd_images:
                    continue
                if name not in images:
                    raise UnknownGenerator(f"no image for odd generator {name!r}")
                img = images[name]
                if not img.has_parity(1):
                    raise ParityError(f"image of odd generator {name!r} must be odd")
                odd_images[name] = img

        out = new_pool.zero()
        for mono, expr in self.terms.items():
            part = _substitute_even(expr, even_images, new_pool)
            for idx in mono:
                part = part * odd_images[self.pool.odd_names[idx]]
            out = out + part
        return out

    # -- rendering -----------------------------------------------------------

    def render(self) -> str:
        """Canonical textual form; parsing it back is exact."""
        if not self.terms:
            return "0"
        pieces = []
        for mono in sorted(self.terms, key=lambda m: (len(m), m)):
            coeff = _render_coefficient(self.terms[mono])
            gens = "*".join(self.pool.odd_names[i] for i in mono)
            pieces.append(f"({coeff})*{gens}" if gens else f"({coeff})")
        return " + ".join(pieces)

    def __repr__(self):
        return f"Superfunction({self.render()})"


def _render_coefficient(expr) -> str:
    num, den = sp.fraction(sp.cancel(expr))
    ns = sp.sstr(num, order="lex").replace("**", "^")
    if den == 1:
        return ns
    ds = sp.sstr(den, order="lex").replace("**", "^")
    return f"({ns})/({ds})"


def _integer_sqrt(n: int):
    if n < 0:
        return None
    r = sp.integer_nthroot(int(n), 2)[0]
    return int(r) if int(r) ** 2 == n else None


def _rational_square_root(q) -> sp.Rational:
    q = sp.Rational(q)
    pn = _integer_sqrt(q.p)
    qd = _integer_sqrt(q.q)
    if pn is None or qd is None:
        raise NotASquare(f"{q} is not the square of a rational")
    return sp.Rational(pn, qd)


def _polynomial_sqrt(poly_expr, syms):
    """Exact square root of a polynomial over Q, or raise NotASquare."""
    if not syms:
        return _rational_square_root(poly_expr)
    content, factors = sp.factor_list(poly_expr, *syms)
    root = _rational_square_root(content)
    for base, exp in factors:
        if exp % 2:
            raise NotASquare(f"{poly_expr} is not an exact polynomial square")
        root = root * base ** (exp // 2)
    return sp.expand(root)


def _rational_function_sqrt(body):
    """Square root of a rational function; requires an exact square with
    positive leading rational."""
    body = sp.cancel(body)
    if body == 0:
        return _ZERO
    num, den = sp.fraction(body)
    syms = sorted(body.free_symbols, key=lambda s: s.name)
    try:
        rn = _polynomial_sqrt(num, syms)
        rd = _polynomial_sqrt(den, syms)
    except NotASquare:
        raise NotASquare(f"body {body} admits no exact square root") from None
    return _can(rn / rd)


def _substitute_even(expr, even_images: dict, new_pool: GeneratorPool):
    """Substitute even variables by even superfunctions via finite Taylor
    expansion around the images' bodies."""
    names = [n for n in even_images]
    syms = [sp.Symbol(n) for n in names]
    dummies = [sp.Dummy(n) for n in names]
    expr = sp.sympify(expr).subs(dict(zip(syms, dummies)), simultaneous=True)

    def expand(e, k):
        if k == len(names):
            return new_pool.scalar(e)
        d = dummies[k]
        img = even_images[names[k]]
        if not e.has(d):
            return expand(e, k + 1)
        b = img.body()
        nil = img.nilpotent_part()
        out = expand(sp.cancel(e.subs(d, b)), k + 1)
        if nil.is_zero():
            return out
        de = e
        power = new_pool.one()
        fact = Fraction(1)
        j = 0
        while True:
            power = power * nil
            if power.is_zero():
                break
            de = sp.diff(de, d)
            if de == 0:
                break
            j += 1
            fact = fact / j
            out = out + expand(sp.cancel(de.subs(d, b)), k + 1) * power * sp.Rational(fact)
        return out

    return expand(expr, 0)
