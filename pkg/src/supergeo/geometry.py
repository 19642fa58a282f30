"""Charts, vector fields, bilinear forms, connections and OSp frames.

Vector fields carry left coefficients, ``X = sum_i X^i d_i``; one-forms and
bilinear forms are evaluated through the right-module pairing axioms, which
on left coefficients read

    F[Y]    = sum_j (-1)^{|xi_j| |Y^j|} F_j * Y^j
    B(X, Y) = sum_ij (-1)^{|B|(|X^i| + |Y^j|)} X^i (-1)^{|Y^j||xi_i|} Y^j B_ij

(the second sign factor drops for even B, which is the common case).
Connections use ``nabla_{d_i} d_j = sum_k Gamma^k_ij d_k`` with left
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

from .errors import (
    ChartMismatch,
    MetricViolation,
    NonInvertible,
    ParityError,
)
from .scalars import GeneratorPool, Superfunction
from .supermatrix import SuperMatrix, gram_schmidt_osp, j_map_signs


class Chart:
    """A single global coordinate chart with a rational box domain.

    ``even`` and ``odd`` name the coordinates; ``flesh`` adds odd constants
    for maps with flesh.  ``box`` maps each even coordinate to a rational
    interval (a, b) with a < b.
    """

    def __init__(self, even, odd, box, flesh=()):
        odd = tuple(odd)
        if len(odd) % 2:
            raise ValueError("the number of odd coordinates must be even")
        self.pool = GeneratorPool(even, odd, flesh)
        self.box = {}
        for name in self.pool.even_names:
            if name not in box:
                raise ValueError(f"missing box interval for {name!r}")
            a, b = box[name]
            a, b = Fraction(a), Fraction(b)
            if not a < b:
                raise ValueError(f"box interval for {name!r} must have a < b")
            self.box[name] = (a, b)

    @property
    def n(self):
        return self.pool.n_even

    @property
    def two_m(self):
        return self.pool.n_coordinate_odd

    @property
    def dim(self):
        return self.n + self.two_m

    def parity(self, i: int) -> int:
        return 0 if i < self.n else 1

    def coordinate_names(self):
        return self.pool.even_names + self.pool.odd_names[: self.two_m]

    def coordinate(self, i: int) -> str:
        return self.coordinate_names()[i]

    def sample_point(self):
        """Rational midpoint of the box, as a substitution dict for bodies."""
        return {
            self.pool.even_symbol(n): sp.Rational((a + b) / 2)
            for n, (a, b) in self.box.items()
        }

    def zero_field(self, parity=0):
        return VectorField(self, [self.pool.zero()] * self.dim, parity)

    def coordinate_field(self, i: int) -> "VectorField":
        comps = [self.pool.zero()] * self.dim
        comps[i] = self.pool.one()
        return VectorField(self, comps, self.parity(i))

    def __eq__(self, other):
        return (
            isinstance(other, Chart)
            and self.pool == other.pool
            and self.box == other.box
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"Chart({self.n}|{self.two_m}"
            + (f"+{self.pool.n_flesh} flesh" if self.pool.n_flesh else "")
            + ")"
        )


def _same_chart(a, b):
    if a.chart != b.chart:
        raise ChartMismatch("objects live on different charts")


class VectorField:
    """X = sum_i X^i d_i with left coefficients over a chart."""

    def __init__(self, chart: Chart, components, parity: int = 0, check: bool = True):
        self.chart = chart
        self.components = [
            c if isinstance(c, Superfunction) else chart.pool.scalar(c)
            for c in components
        ]
        if len(self.components) != chart.dim:
            raise ValueError("one component per coordinate is required")
        self.parity = parity % 2
        if check:
            for i, c in enumerate(self.components):
                if not c.has_parity(self.parity + chart.parity(i)):
                    raise ParityError(
                        f"component {chart.coordinate(i)} breaks homogeneity"
                    )

    def apply(self, f: Superfunction) -> Superfunction:
        if f.pool != self.chart.pool:
            raise ChartMismatch("function lives over a different pool")
        acc = self.chart.pool.zero()
        names = self.chart.coordinate_names()
        for i, c in enumerate(self.components):
            if c.is_zero():
                continue
            acc = acc + c * f.partial(names[i])
        return acc

    def bracket(self, other: "VectorField") -> "VectorField":
        """[X, Y] = XY - (-1)^{|X||Y|} YX as a derivation."""
        _same_chart(self, other)
        sign = -1 if self.parity * other.parity else 1
        comps = [
            self.apply(yc) - other.apply(xc) * sign
            for xc, yc in zip(self.components, other.components)
        ]
        return VectorField(
            self.chart, comps, (self.parity + other.parity) % 2, check=False
        )

    def __add__(self, other):
        _same_chart(self, other)
        if other.parity != self.parity and not other.is_zero() and not self.is_zero():
            raise ParityError("cannot add fields of different parity")
        comps = [a + b for a, b in zip(self.components, other.components)]
        parity = other.parity if self.is_zero() else self.parity
        return VectorField(self.chart, comps, parity, check=False)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, f) -> "VectorField":
        """Left multiplication f*X; the result parity follows the factors."""
        if not isinstance(f, Superfunction):
            f = self.chart.pool.scalar(f)
        fp = f.parity()
        parity = self.parity if fp is None else (self.parity + fp) % 2
        return VectorField(
            self.chart, [f * c for c in self.components], parity, check=False
        )

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        return (
            isinstance(other, VectorField)
            and self.chart == other.chart
            and all(a == b for a, b in zip(self.components, other.components))
        )

    __hash__ = None

    def __repr__(self):
        names = self.chart.coordinate_names()
        parts = [
            f"({c.render()})*d_{n}"
            for c, n in zip(self.components, names)
            if not c.is_zero()
        ]
        return "VectorField(" + (" + ".join(parts) if parts else "0") + ")"


class OneForm:
    """One-form stored through its values F_j = F[d_j]."""

    def __init__(self, chart: Chart, components, parity: int = 0):
        self.chart = chart
        self.components = [
            c if isinstance(c, Superfunction) else chart.pool.scalar(c)
            for c in components
        ]
        self.parity = parity % 2

    @classmethod
    def differential(cls, chart: Chart, f: Superfunction) -> "OneForm":
        """df with df[X] = (-1)^{|f||X|} X(f)."""
        pf = f.parity()
        if pf is None:
            raise ParityError("df needs a homogeneous f")
        comps = []
        for i, name in enumerate(chart.coordinate_names()):
            sign = -1 if pf * chart.parity(i) else 1
            comps.append(f.partial(name) * sign)
        return cls(chart, comps, pf)

    def evaluate(self, Y: VectorField) -> Superfunction:
        acc = self.chart.pool.zero()
        for j, fj in enumerate(self.components):
            yj = Y.components[j]
            if fj.is_zero() or yj.is_zero():
                continue
            sign = -1 if self.chart.parity(j) * ((Y.parity + self.chart.parity(j)) % 2) else 1
            acc = acc + fj * yj * sign
        return acc

    def scale(self, f: Superfunction) -> "OneForm":
        fp = f.parity()
        parity = self.parity if fp is None else (self.parity + fp) % 2
        return OneForm(self.chart, [f * c for c in self.components], parity)

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        return isinstance(other, OneForm) and all(
            a == b for a, b in zip(self.components, other.components)
        )

    __hash__ = None


class BilinearForm:
    """Bilinear form stored through B_ij = B(d_i, d_j)."""

    def __init__(self, chart: Chart, components, parity: int = 0):
        self.chart = chart
        dim = chart.dim
        self.components = [
            [
                c if isinstance(c, Superfunction) else chart.pool.scalar(c)
                for c in row
            ]
            for row in components
        ]
        if len(self.components) != dim or any(len(r) != dim for r in self.components):
            raise ValueError("component grid must be dim x dim")
        self.parity = parity % 2

    @classmethod
    def zero(cls, chart, parity=0):
        z = chart.pool.zero()
        return cls(chart, [[z] * chart.dim for _ in range(chart.dim)], parity)

    @classmethod
    def tensor_product(cls, F: OneForm, G: OneForm) -> "BilinearForm":
        """(F ox G)(X, Y) = (-1)^{|G||X|} F(X) G(Y) on coordinate fields."""
        chart = F.chart
        rows = []
        for i in range(chart.dim):
            sign_i = -1 if (G.parity * chart.parity(i)) % 2 else 1
            rows.append([F.components[i] * G.components[j] * sign_i
                         for j in range(chart.dim)])
        return cls(chart, rows, (F.parity + G.parity) % 2)

    def evaluate(self, X: VectorField, Y: VectorField) -> Superfunction:
        chart = self.chart
        acc = chart.pool.zero()
        for i in range(chart.dim):
            xi = X.components[i]
            if xi.is_zero():
                continue
            pxi = (X.parity + chart.parity(i)) % 2
            for j in range(chart.dim):
                yj = Y.components[j]
                bij = self.components[i][j]
                if yj.is_zero() or bij.is_zero():
                    continue
                pyj = (Y.parity + chart.parity(j)) % 2
                sign = 1
                if pyj * chart.parity(i):
                    sign = -sign
                if self.parity and (pxi + pyj) % 2:
                    sign = -sign
                acc = acc + xi * yj * bij * sign
        return acc

    def scale(self, f: Superfunction) -> "BilinearForm":
        rows = [[f * e for e in row] for row in self.components]
        fp = f.parity()
        parity = self.parity if fp in (None, 0) else (self.parity + 1) % 2
        return BilinearForm(self.chart, rows, parity)

    def __add__(self, other):
        _same_chart(self, other)
        rows = [
            [a + b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.components, other.components)
        ]
        return BilinearForm(self.chart, rows, self.parity)

    def __sub__(self, other):
        _same_chart(self, other)
        rows = [
            [a - b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.components, other.components)
        ]
        return BilinearForm(self.chart, rows, self.parity)

    def is_zero(self):
        return all(e.is_zero() for row in self.components for e in row)

    def is_supersymmetric(self) -> bool:
        chart = self.chart
        for i in range(chart.dim):
            for j in range(chart.dim):
                sign = -1 if chart.parity(i) * chart.parity(j) else 1
                if not (self.components[i][j] - self.components[j][i] * sign).is_zero():
                    return False
        return True

    def is_even_graded(self) -> bool:
        chart = self.chart
        return all(
            self.components[i][j].has_parity(
                (self.parity + chart.parity(i) + chart.parity(j)) % 2
            )
            for i in range(chart.dim)
            for j in range(chart.dim)
        )

    def to_supermatrix(self) -> SuperMatrix:
        return SuperMatrix(
            self.chart.pool, self.chart.n, self.chart.two_m,
            [list(row) for row in self.components], self.parity,
        )

    def __eq__(self, other):
        return (
            isinstance(other, BilinearForm)
            and self.chart == other.chart
            and (self - other).is_zero()
        )

    __hash__ = None


@dataclass
class Signature:
    t: int
    s: int
    two_m: int

    def as_tuple(self):
        return (self.t, self.s, self.two_m)


def flat_metric(chart: Chart, t: int = 0) -> BilinearForm:
    """Standard supermetric g0 with t negative even directions on this chart."""
    from .supermatrix import standard_metric

    s = chart.n - t
    m = chart.two_m // 2
    g0 = standard_metric(chart.pool, t, s, m)
    return BilinearForm(chart, g0.entries, 0)


def validate_metric(g: BilinearForm) -> Signature:
    """Check evenness, supersymmetry and nondegeneracy; return the signature.

    Nondegeneracy is decided on the body as a rational function; the
    signature is sampled at the rational midpoint of the box.
    """
    chart = g.chart
    if g.parity != 0 or not g.is_even_graded():
        raise MetricViolation("evenness", "components break the even grading")
    if not g.is_supersymmetric():
        raise MetricViolation("supersymmetry", "B_ij != +-B_ji")
    body = sp.Matrix(
        chart.dim, chart.dim, lambda i, j: g.components[i][j].body()
    )
    det = sp.cancel(body.det())
    if det == 0:
        raise MetricViolation("nondegeneracy", "body determinant vanishes identically")
    point = chart.sample_point()
    even_block = body[: chart.n, : chart.n].subs(point)
    t, s = _rational_signature(even_block)
    if t + s < chart.n:
        raise MetricViolation(
            "nondegeneracy", "even block is singular at the sample point"
        )
    return Signature(t, s, chart.two_m)


def _rational_signature(m: sp.Matrix):
    """Exact signature of a rational symmetric matrix by Lagrange reduction."""
    m = sp.Matrix(m)
    n = m.shape[0]
    t = s = 0
    idx = list(range(n))
    while idx:
        piv = next((i for i in idx if m[i, i] != 0), None)
        if piv is None:
            pair = None
            for a in idx:
                for b in idx:
                    if a < b and m[a, b] != 0:
                        pair = (a, b)
                        break
                if pair:
                    break
            if pair is None:
                break  # remaining block is zero: degenerate
            a, b = pair
            for k in range(n):
                m[a, k] = m[a, k] + m[b, k]
            for k in range(n):
                m[k, a] = m[k, a] + m[k, b]
            continue
        d = m[piv, piv]
        if d > 0:
            s += 1
        else:
            t += 1
        idx.remove(piv)
        for i in list(idx):
            f = m[i, piv] / d
            if f == 0:
                continue
            for k in range(n):
                m[i, k] = sp.Rational(m[i, k] - f * m[piv, k])
            for k in range(n):
                m[k, i] = sp.Rational(m[k, i] - m[k, piv] * f)
    return t, s


class Connection:
    """Christoffel table for nabla_{d_i} d_j = sum_k Gamma^k_ij d_k."""

    def __init__(self, chart: Chart, gamma):
        self.chart = chart
        self.gamma = gamma  # gamma[i][j][k] -> Superfunction

    @classmethod
    def flat(cls, chart: Chart):
        z = chart.pool.zero()
        dim = chart.dim
        return cls(chart, [[[z] * dim for _ in range(dim)] for _ in range(dim)])

    def coordinate_derivative(self, i: int, Y: VectorField) -> VectorField:
        """nabla_{d_i} Y."""
        chart = self.chart
        names = chart.coordinate_names()
        comps = []
        for k in range(chart.dim):
            acc = Y.components[k].partial(names[i])
            for j in range(chart.dim):
                yj = Y.components[j]
                if yj.is_zero() or self.gamma[i][j][k].is_zero():
                    continue
                sign = -1 if chart.parity(i) * ((Y.parity + chart.parity(j)) % 2) else 1
                acc = acc + yj * self.gamma[i][j][k] * sign
            comps.append(acc)
        return VectorField(chart, comps, (Y.parity + chart.parity(i)) % 2, check=False)

    def derivative(self, X: VectorField, Y: VectorField) -> VectorField:
        """nabla_X Y = sum_i X^i nabla_{d_i} Y."""
        chart = self.chart
        out = chart.zero_field((X.parity + Y.parity) % 2)
        for i in range(chart.dim):
            xi = X.components[i]
            if xi.is_zero():
                continue
            out = out + self.coordinate_derivative(i, Y).scale(xi)
        return out


def levi_civita(g: BilinearForm) -> Connection:
    """The unique graded metric, torsion-free connection, via the Koszul rule

    2 <nabla_i d_j, d_k> = d_i g_jk + (-1)^{|i|(|j|+|k|)} d_j g_ki
                           - (-1)^{|k|(|i|+|j|)} d_k g_ij
    """
    chart = g.chart
    validate_metric(g)
    names = chart.coordinate_names()
    dim = chart.dim
    half = sp.Rational(1, 2)
    ginv = g.to_supermatrix().inverse()
    gamma = []
    for i in range(dim):
        pi = chart.parity(i)
        rows = []
        for j in range(dim):
            pj = chart.parity(j)
            K = []
            for k in range(dim):
                pk = chart.parity(k)
                term = g.components[j][k].partial(names[i])
                t2 = g.components[k][i].partial(names[j])
                term = term + (t2 if (pi * (pj + pk)) % 2 == 0 else -t2)
                t3 = g.components[i][j].partial(names[k])
                term = term - (t3 if (pk * (pi + pj)) % 2 == 0 else -t3)
                K.append(term * half)
            # solve sum_l Gamma^l_ij g_lk = K_k  =>  Gamma^l = sum_k K_k (g^-1)_kl
            rows.append(
                [
                    sum(
                        (K[k] * ginv.entries[k][l] for k in range(dim)),
                        start=chart.pool.zero(),
                    )
                    for l in range(dim)
                ]
            )
        gamma.append(rows)
    return Connection(chart, gamma)


def connection_residuals(g: BilinearForm, conn: Connection):
    """Independent certificate: torsion and metricity residuals per triple.

    torsion[i][j][k]   = Gamma^k_ij - (-1)^{|i||j|} Gamma^k_ji
    metricity[i][j][k] = d_i g_jk - <nabla_i d_j, d_k>
                         - (-1)^{|i||j|} <d_j, nabla_i d_k>
    """
    chart = g.chart
    names = chart.coordinate_names()
    dim = chart.dim
    torsion = []
    metricity = []
    coord = [chart.coordinate_field(i) for i in range(dim)]
    for i in range(dim):
        ti, mi = [], []
        for j in range(dim):
            tj, mj = [], []
            sign_ij = -1 if chart.parity(i) * chart.parity(j) else 1
            nab_ij = conn.coordinate_derivative(i, coord[j])
            for k in range(dim):
                tj.append(
                    conn.gamma[i][j][k] - conn.gamma[j][i][k] * sign_ij
                )
                nab_ik = conn.coordinate_derivative(i, coord[k])
                res = g.components[j][k].partial(names[i])
                res = res - g.evaluate(nab_ij, coord[k])
                res = res - g.evaluate(coord[j], nab_ik) * sign_ij
                mj.append(res)
            ti.append(tj)
            mi.append(mj)
        torsion.append(ti)
        metricity.append(mi)
    return torsion, metricity


class OSpFrame:
    """Frame fields e_j with g(e_i, e_j) = (g0)_{ij} exactly."""

    def __init__(self, chart: Chart, fields, signature: Signature):
        self.chart = chart
        self.fields = list(fields)
        self.signature = signature
        self.j_signs = j_map_signs(signature.t, signature.s, signature.two_m // 2)

    @classmethod
    def build(cls, g: BilinearForm) -> "OSpFrame":
        """Run graded Gram-Schmidt over the scalar ring and certify the result."""
        sig = validate_metric(g)
        E, (t, s, m) = gram_schmidt_osp(g.to_supermatrix())
        if (t, s, 2 * m) != sig.as_tuple():
            # algebraic and sampled signatures must agree
            raise MetricViolation(
                "nondegeneracy",
                f"signature mismatch: sampled {sig.as_tuple()}, reduced {(t, s, 2 * m)}",
            )
        chart = g.chart
        fields = []
        for j in range(chart.dim):
            pj = chart.parity(j)
            comps = []
            for a in range(chart.dim):
                coeff = E.entries[a][j]
                # right coefficient -> left coefficient flip
                sign = -1 if chart.parity(a) * ((pj + chart.parity(a)) % 2) else 1
                comps.append(coeff * sign)
            fields.append(VectorField(chart, comps, pj))
        frame = cls(chart, fields, Signature(t, s, 2 * m))
        frame.certify(g)
        return frame

    def certify(self, g: BilinearForm):
        from .supermatrix import standard_metric

        sig = self.signature
        g0 = standard_metric(self.chart.pool, sig.t, sig.s, sig.two_m // 2)
        for i in range(self.chart.dim):
            for j in range(self.chart.dim):
                got = g.evaluate(self.fields[i], self.fields[j])
                if not (got - g0.entries[i][j]).is_zero():
                    raise MetricViolation(
                        "frame", f"g(e_{i}, e_{j}) != (g0)_{i}{j}: {got.render()}"
                    )

    def j_field(self, j: int):
        """J e_j as (sign, frame field)."""
        sign, tgt = self.j_signs[j]
        return sign, self.fields[tgt]

    def component_matrix(self) -> SuperMatrix:
        """M[m][a] = (e_m)^a; used to expand fields in the frame."""
        rows = [
            [self.fields[mm].components[a] for a in range(self.chart.dim)]
            for mm in range(self.chart.dim)
        ]
        return SuperMatrix(self.chart.pool, self.chart.n, self.chart.two_m, rows)

    def rotate(self, A: SuperMatrix) -> "OSpFrame":
        """Right action (e * A)_j = sum_i e_i A_ij; A must be OSp for the
        result to stay a frame (certified by the caller)."""
        chart = self.chart
        fields = []
        for j in range(chart.dim):
            comps = [chart.pool.zero()] * chart.dim
            parity = chart.parity(j)
            acc = chart.zero_field(parity)
            for i in range(chart.dim):
                coeff = A.entries[i][j]
                if coeff.is_zero():
                    continue
                # e_i * coeff (right) -> (-1)^{|coeff||e_i|} coeff * e_i (left)
                cpar = coeff.parity()
                sign = -1 if cpar and chart.parity(i) else 1
                acc = acc + self.fields[i].scale(coeff * sign)
            fields.append(acc)
        return OSpFrame(chart, fields, self.signature)


def divergence(
    X: VectorField, g: BilinearForm, conn: Connection, frame: OSpFrame
) -> Superfunction:
    """div X = sum_j (-1)^{|e_j||X|} <nabla_{e_j} X, J e_j>_g."""
    chart = X.chart
    acc = chart.pool.zero()
    for j in range(chart.dim):
        ej = frame.fields[j]
        sj, jej = frame.j_field(j)
        nab = conn.derivative(ej, X)
        val = g.evaluate(nab, jej) * sj
        sign = -1 if (chart.parity(j) * X.parity) % 2 else 1
        acc = acc + val * sign
    return acc


def divergence_via_supertrace(X: VectorField, conn: Connection) -> Superfunction:
    """Frame-free route: supertrace of Y -> (-1)^{|X||Y|} nabla_Y X in
    right coordinates; the dual path for the frame formula."""
    chart = X.chart
    acc = chart.pool.zero()
    for j in range(chart.dim):
        comp = conn.coordinate_derivative(j, X).components[j]
        sign = -1 if (chart.parity(j) * (1 + X.parity)) % 2 else 1
        acc = acc + comp * sign
    return acc


def str_with_metric(K: BilinearForm, g: BilinearForm, frame: OSpFrame) -> Superfunction:
    """str_g K = sum_j K(e_j, J e_j) over an OSp frame."""
    chart = K.chart
    acc = chart.pool.zero()
    for j in range(chart.dim):
        sj, jej = frame.j_field(j)
        acc = acc + K.evaluate(frame.fields[j], jej) * sj
    return acc


def str_with_metric_via_matrix(K: BilinearForm, g: BilinearForm) -> Superfunction:
    """Dual path: supertrace of the map K~ with <K~ v, w>_g = K(v, w)."""
    chart = K.chart
    dim = chart.dim
    pool = chart.pool
    acc = pool.zero()
    for j in range(dim):
        pj = chart.parity(j)
        # solve sum_k (-1)^{|K~_kj||i|} g_ki x_k = K_ji for the column x = K~_.j
        rows = []
        for i in range(dim):
            pi = chart.parity(i)
            row = []
            for k in range(dim):
                pK = (K.parity + chart.parity(k) + pj) % 2
                sign = -1 if (pK * pi) % 2 else 1
                row.append(g.components[k][i] * sign)
            rows.append(row)
        A = SuperMatrix(pool, chart.n, chart.two_m, rows)
        try:
            Ainv = A.inverse()
        except NonInvertible:
            raise MetricViolation("nondegeneracy", "metric matrix not invertible") from None
        xjj = sum(
            (Ainv.entries[j][i] * K.components[j][i] for i in range(dim)),
            start=pool.zero(),
        )
        sign = -1 if (pj * (K.parity + 1)) % 2 else 1
        acc = acc + xjj * sign
    return acc
