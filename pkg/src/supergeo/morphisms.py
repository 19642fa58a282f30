"""Maps with flesh between charts and the superharmonic field theory on top.

A morphism is stored through its coordinate pullbacks ``phi#(eta^a)``, one
even/odd superfunction over the source pool per target coordinate.  Fields
along the morphism keep evaluation components ``V^a := V(eta^a)``; every
contraction then happens in source-ring arithmetic through the right-module
pairing axioms

    <V*f, W> = (-1)^{|f||W|} <V, W> * f,      <V, W*f> = <V, W> * f,

and the package certifies the resulting sign bookkeeping with the metricity,
chain-rule and Noether residual identities rather than per-formula sign
derivations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import sympy as sp

from .errors import ChartMismatch, ParityError, ScenarioError
from .geometry import (
    BilinearForm,
    Chart,
    OSpFrame,
    VectorField,
    divergence,
    levi_civita,
    str_with_metric,
    validate_metric,
)
from .lie import lie_derivative_bilinear
from .scalars import Superfunction
from .supermatrix import SuperMatrix


class Morphism:
    """Map with flesh from a source chart into a (flesh-free) target chart."""

    def __init__(self, source: Chart, target: Chart, images: dict, check_box=True):
        if target.pool.n_flesh:
            raise ScenarioError("target charts of morphisms must carry no flesh")
        self.source = source
        self.target = target
        self.images = {}
        names = target.coordinate_names()
        for i, name in enumerate(names):
            if name not in images:
                raise ScenarioError(f"missing pullback expression for {name!r}")
            img = images[name]
            if not isinstance(img, Superfunction) or img.pool != source.pool:
                raise ChartMismatch("pullback expressions must live over the source pool")
            if not img.has_parity(target.parity(i)):
                raise ParityError(f"pullback of {name!r} must have parity {target.parity(i)}")
            self.images[name] = img
        if check_box:
            self._certify_box()

    @classmethod
    def identity(cls, chart: Chart) -> "Morphism":
        images = {n: chart.pool.generator(n) for n in chart.coordinate_names()}
        return cls(chart, chart, images, check_box=False)

    def _certify_box(self):
        """Sampled certificate: bodies of even images stay inside the target box."""
        grid = [self.source.sample_point()]
        names = self.source.pool.even_names
        if names:
            corners = itertools.product(
                *[(sp.Rational(a), sp.Rational(b)) for a, b in
                  (self.source.box[n] for n in names)]
            )
            syms = [self.source.pool.even_symbol(n) for n in names]
            grid += [dict(zip(syms, c)) for c in corners]
        for name in self.target.pool.even_names:
            a, b = self.target.box[name]
            body = self.images[name].body()
            for point in grid:
                val = sp.Rational(sp.cancel(body).subs(point))
                if not (sp.Rational(a) <= val <= sp.Rational(b)):
                    raise ScenarioError(
                        f"body of pullback for {name!r} leaves the target box at {point}"
                    )

    def pullback(self, f: Superfunction) -> Superfunction:
        """phi#(f): graded-safe substitution of the coordinate pullbacks."""
        if f.pool != self.target.pool:
            raise ChartMismatch("function must live over the target pool")
        return f.substitute(self.images, self.source.pool)

    def differential(self, Y: VectorField) -> "FieldAlongMorphism":
        """dPhi[Y] with components Y(phi# eta^a)."""
        if Y.chart != self.source:
            raise ChartMismatch("field must live on the source chart")
        comps = [
            Y.apply(self.images[name]) for name in self.target.coordinate_names()
        ]
        return FieldAlongMorphism(self, comps, Y.parity)

    def pull_target_field(self, xi: VectorField) -> "FieldAlongMorphism":
        """phi o xi with components phi#(xi^a)."""
        if xi.chart != self.target:
            raise ChartMismatch("field must live on the target chart")
        comps = [self.pullback(c) for c in xi.components]
        return FieldAlongMorphism(self, comps, xi.parity)

    def __repr__(self):
        parts = ", ".join(
            f"{n} -> {img.render()}" for n, img in self.images.items()
        )
        return f"Morphism({parts})"


class FieldAlongMorphism:
    """Derivation along the morphism, stored as V^a = V(eta^a)."""

    def __init__(self, phi: Morphism, components, parity: int):
        self.phi = phi
        self.components = list(components)
        self.parity = parity % 2
        for a, c in enumerate(self.components):
            if not c.has_parity((self.parity + phi.target.parity(a)) % 2):
                raise ParityError(
                    f"component {phi.target.coordinate(a)} breaks homogeneity"
                )

    def __add__(self, other):
        if other.phi is not self.phi and other.phi.images != self.phi.images:
            raise ChartMismatch("fields along different morphisms")
        if self.parity != other.parity and not (self.is_zero() or other.is_zero()):
            raise ParityError("cannot add fields of different parity")
        parity = other.parity if self.is_zero() else self.parity
        return FieldAlongMorphism(
            self.phi,
            [a + b for a, b in zip(self.components, other.components)],
            parity,
        )

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, f) -> "FieldAlongMorphism":
        if not isinstance(f, Superfunction):
            f = self.phi.source.pool.scalar(f)
        fp = f.parity()
        parity = self.parity if fp is None else (self.parity + fp) % 2
        return FieldAlongMorphism(self.phi, [f * c for c in self.components], parity)

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def apply(self, f: Superfunction) -> Superfunction:
        """Act as a derivation along phi#: V(f) in source-ring arithmetic."""
        target = self.phi.target
        acc = self.phi.source.pool.zero()
        names = target.coordinate_names()
        for a, comp in enumerate(self.components):
            if comp.is_zero():
                continue
            acc = acc + comp * self.phi.pullback(f.partial(names[a]))
        return acc

    def __repr__(self):
        names = self.phi.target.coordinate_names()
        parts = [
            f"({c.render()})*D_{n}"
            for c, n in zip(self.components, names)
            if not c.is_zero()
        ]
        return "FieldAlongMorphism(" + (" + ".join(parts) if parts else "0") + ")"


@dataclass
class NoetherReport:
    precondition_ok: bool
    precondition_residuals: list
    divergence_residual: Superfunction
    tension_is_zero: bool
    current_divergence: Superfunction | None
    lemma_residuals: list | None = None

    @property
    def passed(self) -> bool:
        if not self.precondition_ok:
            return False
        if not self.divergence_residual.is_zero():
            return False
        if self.current_divergence is not None and not self.current_divergence.is_zero():
            return False
        if self.lemma_residuals:
            return all(r.is_zero() for r in self.lemma_residuals)
        return True


@dataclass
class StressEnergyReport:
    energy: Superfunction
    lemma_residual: Superfunction          # div S[xi] + <dPhi[xi], tau>
    current_identity_residual: Superfunction  # div Y_xi - div S[xi] - correction
    conserved_divergence: Superfunction | None  # div Y_xi when hypotheses hold

    @property
    def passed(self) -> bool:
        ok = self.lemma_residual.is_zero() and self.current_identity_residual.is_zero()
        if self.conserved_divergence is not None:
            ok = ok and self.conserved_divergence.is_zero()
        return ok


class HarmonicSetup:
    """A morphism between semi-Riemannian charts with everything precomputed.

    Bundles the source metric h (with Levi-Civita connection and OSp frame)
    and the target metric g (with its connection, pulled back on demand).
    """

    def __init__(self, phi: Morphism, h: BilinearForm, g: BilinearForm):
        if h.chart != phi.source or g.chart != phi.target:
            raise ChartMismatch("metrics must live on the morphism's charts")
        self.phi = phi
        self.h = h
        self.g = g
        self.source_signature = validate_metric(h)
        validate_metric(g)
        self.source_connection = levi_civita(h)
        self.target_connection = levi_civita(g)
        self.frame = OSpFrame.build(h)
        tdim = phi.target.dim
        self._g_pulled = [
            [phi.pullback(g.components[a][b]) for b in range(tdim)]
            for a in range(tdim)
        ]
        self._gamma_pulled = [
            [
                [phi.pullback(self.target_connection.gamma[i][j][k]) for k in range(tdim)]
                for j in range(tdim)
            ]
            for i in range(tdim)
        ]
        self._tension = None

    # -- pairing and pullbacks -------------------------------------------------

    def pair(self, V: FieldAlongMorphism, W: FieldAlongMorphism) -> Superfunction:
        """<V, W>_{g_Phi} on evaluation components."""
        target = self.phi.target
        pool = self.phi.source.pool
        acc = pool.zero()
        for a in range(target.dim):
            va = V.components[a]
            if va.is_zero():
                continue
            for b in range(target.dim):
                wb = W.components[b]
                gab = self._g_pulled[a][b]
                if wb.is_zero() or gab.is_zero():
                    continue
                pw = (W.parity + target.parity(b)) % 2
                sign = -1 if pw * target.parity(a) else 1
                acc = acc + va * wb * gab * sign
        return acc

    def pullback_metric(self) -> BilinearForm:
        return self.pullback_bilinear(self.g)

    def pullback_bilinear(self, B: BilinearForm) -> BilinearForm:
        """Phi* B via <B_Phi>(dPhi[.], dPhi[.]); B may have either parity."""
        if B.chart != self.phi.target:
            raise ChartMismatch("form must live on the target chart")
        source, target = self.phi.source, self.phi.target
        pulled = [
            [self.phi.pullback(B.components[a][b]) for b in range(target.dim)]
            for a in range(target.dim)
        ]
        diffs = [
            self.phi.differential(source.coordinate_field(i))
            for i in range(source.dim)
        ]
        rows = []
        for i in range(source.dim):
            V = diffs[i]
            row = []
            for j in range(source.dim):
                W = diffs[j]
                acc = source.pool.zero()
                for a in range(target.dim):
                    va = V.components[a]
                    if va.is_zero():
                        continue
                    pv = (V.parity + target.parity(a)) % 2
                    for b in range(target.dim):
                        wb = W.components[b]
                        if wb.is_zero() or pulled[a][b].is_zero():
                            continue
                        pw = (W.parity + target.parity(b)) % 2
                        sign = 1
                        if pw * target.parity(a):
                            sign = -sign
                        if B.parity and (pv + pw) % 2:
                            sign = -sign
                        acc = acc + va * wb * pulled[a][b] * sign
                row.append(acc)
            rows.append(row)
        return BilinearForm(source, rows, B.parity)

    # -- pullback connection -----------------------------------------------------

    def connection_apply(
        self, X: VectorField, V: FieldAlongMorphism
    ) -> FieldAlongMorphism:
        """(nabla_Phi)_X V from the two-term coordinate display."""
        target = self.phi.target
        dX = self.phi.differential(X)
        pv = V.parity
        comps = []
        for b in range(target.dim):
            pb = target.parity(b)
            acc = X.apply(V.components[b])
            for i in range(target.dim):
                di = dX.components[i]
                if di.is_zero():
                    continue
                for j in range(target.dim):
                    vj = V.components[j]
                    gam = self._gamma_pulled[i][j][b]
                    if vj.is_zero() or gam.is_zero():
                        continue
                    pj = target.parity(j)
                    sign = -1 if ((pj + pb) * (pv + pj)) % 2 else 1
                    acc = acc + di * gam * vj * sign
            comps.append(acc)
        return FieldAlongMorphism(self.phi, comps, (X.parity + pv) % 2)

    def second_fundamental_form(
        self, X: VectorField, Y: VectorField
    ) -> FieldAlongMorphism:
        """B_{X,Y}(Phi) = nabla_X(dPhi[Y]) - dPhi[nabla_X Y]."""
        first = self.connection_apply(X, self.phi.differential(Y))
        second = self.phi.differential(self.source_connection.derivative(X, Y))
        return first - second

    def tension(self) -> FieldAlongMorphism:
        """tau(Phi) = (nabla_{e_j} dPhi)[J e_j] summed over the source frame."""
        if self._tension is None:
            acc = FieldAlongMorphism(
                self.phi, [self.phi.source.pool.zero()] * self.phi.target.dim, 0
            )
            for j in range(self.phi.source.dim):
                sj, jej = self.frame.j_field(j)
                term = self.second_fundamental_form(self.frame.fields[j], jej)
                acc = acc + term.scale(sj)
            self._tension = acc
        return self._tension

    def tension_with_frame(self, frame: OSpFrame) -> FieldAlongMorphism:
        """Recompute tau with another frame (frame-independence certificate)."""
        acc = FieldAlongMorphism(
            self.phi, [self.phi.source.pool.zero()] * self.phi.target.dim, 0
        )
        for j in range(self.phi.source.dim):
            sj, jej = frame.j_field(j)
            term = self.second_fundamental_form(frame.fields[j], jej)
            acc = acc + term.scale(sj)
        return acc

    def is_superharmonic(self) -> bool:
        return self.tension().is_zero()

    # -- divergence and currents ---------------------------------------------------

    def divergence_along(self, xi: FieldAlongMorphism) -> Superfunction:
        """div xi = (-1)^{|e_i||xi|} <nabla_{e_i} xi, dPhi[J e_i]>."""
        source = self.phi.source
        acc = source.pool.zero()
        for i in range(source.dim):
            si, jei = self.frame.j_field(i)
            nab = self.connection_apply(self.frame.fields[i], xi)
            val = self.pair(nab, self.phi.differential(jei)) * si
            sign = -1 if (source.parity(i) * xi.parity) % 2 else 1
            acc = acc + val * sign
        return acc

    def noether_current(self, xi: FieldAlongMorphism) -> VectorField:
        """W_xi = <xi, dPhi[e_j]> J e_j, a source vector field of parity |xi|."""
        source = self.phi.source
        out = source.zero_field(xi.parity)
        for j in range(source.dim):
            coeff = self.pair(xi, self.phi.differential(self.frame.fields[j]))
            if coeff.is_zero():
                continue
            sj, jej = self.frame.j_field(j)
            out = out + jej.scale(coeff * sj)
        return out

    def source_divergence(self, X: VectorField) -> Superfunction:
        return divergence(X, self.h, self.source_connection, self.frame)

    def div_identity_residual(self, xi: FieldAlongMorphism) -> Superfunction:
        """div W_xi - div xi - <xi, tau(Phi)>; identically zero."""
        w = self.noether_current(xi)
        return (
            self.source_divergence(w)
            - self.divergence_along(xi)
            - self.pair(xi, self.tension())
        )

    # -- Noether theorems ------------------------------------------------------------

    def check_noether_target(self, xi: VectorField) -> NoetherReport:
        """Target-space Killing field: div(phi o xi) = 0, and for
        superharmonic Phi also div W = 0; plus the pullback Lie-derivative
        lemma, verified componentwise."""
        L = lie_derivative_bilinear(xi, self.g)
        pre_res = [e for row in L.components for e in row if not e.is_zero()]
        pulled = self.phi.pull_target_field(xi)
        div_val = self.divergence_along(pulled)
        harmonic = self.is_superharmonic()
        current_div = None
        if harmonic:
            current_div = self.source_divergence(self.noether_current(pulled))
        lemma = self._pullback_lie_lemma_residuals(xi, L)
        return NoetherReport(
            precondition_ok=not pre_res,
            precondition_residuals=pre_res,
            divergence_residual=div_val,
            tension_is_zero=harmonic,
            current_divergence=current_div,
            lemma_residuals=lemma,
        )

    def _pullback_lie_lemma_residuals(self, xi: VectorField, L: BilinearForm):
        """Phi*(L_xi g)(Y,Z) = (-1)^{|xi||Y|} <nabla_Y (phi o xi), dPhi[Z]>
        + (-1)^{|xi||Y|+|xi||Z|} <dPhi[Y], nabla_Z (phi o xi)> on coordinates."""
        source = self.phi.source
        pulled_L = self.pullback_bilinear(L)
        pxi = xi.parity
        phi_xi = self.phi.pull_target_field(xi)
        coord = [source.coordinate_field(i) for i in range(source.dim)]
        nabla_phi_xi = [self.connection_apply(c, phi_xi) for c in coord]
        diffs = [self.phi.differential(c) for c in coord]
        residuals = []
        for i in range(source.dim):
            pi = source.parity(i)
            for j in range(source.dim):
                pj = source.parity(j)
                rhs = self.pair(nabla_phi_xi[i], diffs[j])
                rhs = rhs * (-1 if (pxi * pi) % 2 else 1)
                t2 = self.pair(diffs[i], nabla_phi_xi[j])
                rhs = rhs + t2 * (-1 if (pxi * pi + pxi * pj) % 2 else 1)
                residuals.append(pulled_L.components[i][j] - rhs)
        return residuals

    def check_noether_domain(self, xi: VectorField) -> NoetherReport:
        """Phi-Killing field on the source: L_xi(Phi* g) = 0 implies
        div(dPhi[xi]) = 0; for superharmonic Phi also div W_{dPhi[xi]} = 0."""
        pg = self.pullback_metric()
        L = lie_derivative_bilinear(xi, pg)
        pre_res = [e for row in L.components for e in row if not e.is_zero()]
        dxi = self.phi.differential(xi)
        div_val = self.divergence_along(dxi)
        harmonic = self.is_superharmonic()
        current_div = None
        if harmonic:
            current_div = self.source_divergence(self.noether_current(dxi))
        return NoetherReport(
            precondition_ok=not pre_res,
            precondition_residuals=pre_res,
            divergence_residual=div_val,
            tension_is_zero=harmonic,
            current_divergence=current_div,
        )

    # -- stress-energy ------------------------------------------------------------

    def energy_density(self) -> Superfunction:
        """e(Phi) = 1/2 str_h(Phi* g)."""
        return str_with_metric(self.pullback_metric(), self.h, self.frame) * sp.Rational(1, 2)

    def stress_energy(self) -> BilinearForm:
        """S_Phi = e(Phi) h - Phi* g."""
        e = self.energy_density()
        return self.h.scale(e) - self.pullback_metric()

    def _nabla_form_eval(self, S: BilinearForm, X: VectorField, Y: VectorField, Z: VectorField):
        """<(nabla_X S)>(Y, Z) = X S(Y,Z) - S(nabla_X Y, Z) - (-1)^{|X||Y|} S(Y, nabla_X Z)."""
        conn = self.source_connection
        val = X.apply(S.evaluate(Y, Z))
        val = val - S.evaluate(conn.derivative(X, Y), Z)
        sign = -1 if (X.parity * Y.parity) % 2 else 1
        val = val - S.evaluate(Y, conn.derivative(X, Z)) * sign
        return val

    def div_form(self, S: BilinearForm, xi: VectorField) -> Superfunction:
        """div S[xi] = (-1)^{|e_i||xi|} <(nabla_{e_i} S)>(xi, J e_i)."""
        source = self.phi.source
        acc = source.pool.zero()
        for i in range(source.dim):
            si, jei = self.frame.j_field(i)
            val = self._nabla_form_eval(S, self.frame.fields[i], xi, jei) * si
            sign = -1 if (source.parity(i) * xi.parity) % 2 else 1
            acc = acc + val * sign
        return acc

    def stress_energy_report(self, xi: VectorField) -> StressEnergyReport:
        """All three stress-energy identities for a source vector field xi."""
        S = self.stress_energy()
        tau = self.tension()
        divS = self.div_form(S, xi)
        r1 = divS + self.pair(self.phi.differential(xi), tau)

        # Y_xi = <S>(xi, e_i) J e_i
        source = self.phi.source
        Y = source.zero_field(xi.parity)
        for i in range(source.dim):
            coeff = S.evaluate(xi, self.frame.fields[i])
            if coeff.is_zero():
                continue
            si, jei = self.frame.j_field(i)
            Y = Y + jei.scale(coeff * si)
        divY = self.source_divergence(Y)

        Lh = lie_derivative_bilinear(xi, self.h)
        corr = source.pool.zero()
        for j in range(source.dim):
            sign_j = -1 if source.parity(j) else 1
            sj, jej = self.frame.j_field(j)
            for i in range(source.dim):
                si, jei = self.frame.j_field(i)
                a = Lh.evaluate(self.frame.fields[i], jej) * sj
                b = S.evaluate(self.frame.fields[j], jei) * si
                if a.is_zero() or b.is_zero():
                    continue
                corr = corr + a * b * sign_j
        corr = corr * sp.Rational(1, 2)
        r2 = divY - divS - corr

        conserved = None
        if tau.is_zero() and Lh.is_zero():
            conserved = divY
        return StressEnergyReport(
            energy=self.energy_density(),
            lemma_residual=r1,
            current_identity_residual=r2,
            conserved_divergence=conserved,
        )


def osp_frame_rotation(frame: OSpFrame) -> SuperMatrix:
    """A nontrivial constant OSp matrix for the frame's signature; used as the
    second frame in frame-independence certificates."""
    sig = frame.signature
    pool = frame.chart.pool
    A = SuperMatrix.identity(pool, sig.t + sig.s, sig.two_m)
    if sig.s >= 2:
        i, j = sig.t + 0, sig.t + 1
        c, s = sp.Rational(3, 5), sp.Rational(4, 5)
        A.entries[i][i] = pool.scalar(c)
        A.entries[i][j] = pool.scalar(-s)
        A.entries[j][i] = pool.scalar(s)
        A.entries[j][j] = pool.scalar(c)
    elif sig.t >= 1 and sig.s >= 1:
        i, j = sig.t - 1, sig.t
        ch_, sh = sp.Rational(5, 4), sp.Rational(3, 4)
        A.entries[i][i] = pool.scalar(ch_)
        A.entries[i][j] = pool.scalar(sh)
        A.entries[j][i] = pool.scalar(sh)
        A.entries[j][j] = pool.scalar(ch_)
    if sig.two_m >= 2:
        a = sig.t + sig.s
        A.entries[a][a + 1] = pool.scalar(sp.Rational(1, 3))  # symplectic shear
    return A
