"""Parity-graded matrices over the Grassmann scalar ring.

Matrix conventions follow the right-action picture: a map ``L`` sends the
``i``-th basis vector to ``sum_m e_m * L[m][i]`` (right coefficients), and a
basis tuple transforms as ``(X * A)_j = sum_i X_i * A[i][j]``.  Entry ``(i, j)``
of a homogeneous matrix of parity ``p`` carries parity ``p + |i| + |j|``.

The pairing of coefficient columns against an even bilinear form ``B`` uses
the right-module axioms ``B(v*f, w) = (-1)^{|f||w|} B(v, w) * f`` and
``B(v, w*f) = B(v, w) * f``.
"""

from __future__ import annotations

import itertools

import sympy as sp

from .errors import (
    InhomogeneousMatrix,
    MetricViolation,
    NonInvertible,
    NonInvertibleBlock,
    NotASquare,
    PoolMismatch,
)
from .scalars import GeneratorPool, Superfunction


class SuperMatrix:
    """Square matrix with block dimensions p|q over a generator pool."""

    def __init__(self, pool: GeneratorPool, p: int, q: int, entries, parity: int = 0):
        self.pool = pool
        self.p = p
        self.q = q
        self.parity = parity % 2
        dim = p + q
        if len(entries) != dim or any(len(row) != dim for row in entries):
            raise ValueError("entry grid does not match block dimensions")
        self.entries = [
            [e if isinstance(e, Superfunction) else pool.scalar(e) for e in row]
            for row in entries
        ]

    # -- basics ---------------------------------------------------------------

    @property
    def dim(self):
        return self.p + self.q

    def slot_parity(self, i: int) -> int:
        return 0 if i < self.p else 1

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def zero(cls, pool, p, q, parity=0):
        z = pool.zero()
        return cls(pool, p, q, [[z] * (p + q) for _ in range(p + q)], parity)

    @classmethod
    def identity(cls, pool, p, q):
        m = cls.zero(pool, p, q)
        one = pool.one()
        for i in range(p + q):
            m.entries[i][i] = one
        return m

    @classmethod
    def from_rows(cls, pool, p, q, rows, parity=0):
        return cls(pool, p, q, rows, parity)

    def _check_compat(self, other):
        if not isinstance(other, SuperMatrix):
            raise TypeError("expected a SuperMatrix")
        if other.pool != self.pool:
            raise PoolMismatch("matrices over different pools")
        if (other.p, other.q) != (self.p, self.q):
            raise ValueError("block dimension mismatch")

    def __add__(self, other):
        self._check_compat(other)
        rows = [
            [self.entries[i][j] + other.entries[i][j] for j in range(self.dim)]
            for i in range(self.dim)
        ]
        return SuperMatrix(self.pool, self.p, self.q, rows, self.parity)

    def __sub__(self, other):
        self._check_compat(other)
        rows = [
            [self.entries[i][j] - other.entries[i][j] for j in range(self.dim)]
            for i in range(self.dim)
        ]
        return SuperMatrix(self.pool, self.p, self.q, rows, self.parity)

    def __neg__(self):
        rows = [[-e for e in row] for row in self.entries]
        return SuperMatrix(self.pool, self.p, self.q, rows, self.parity)

    def __mul__(self, other):
        if isinstance(other, SuperMatrix):
            self._check_compat(other)
            dim = self.dim
            rows = []
            for i in range(dim):
                row = []
                for j in range(dim):
                    acc = self.pool.zero()
                    for k in range(dim):
                        acc = acc + self.entries[i][k] * other.entries[k][j]
                    row.append(acc)
                rows.append(row)
            return SuperMatrix(
                self.pool, self.p, self.q, rows, (self.parity + other.parity) % 2
            )
        scalar = other if isinstance(other, Superfunction) else self.pool.scalar(other)
        rows = [[e * scalar for e in row] for row in self.entries]
        return SuperMatrix(self.pool, self.p, self.q, rows, self.parity)

    def is_homogeneous(self) -> bool:
        for i in range(self.dim):
            for j in range(self.dim):
                want = (self.parity + self.slot_parity(i) + self.slot_parity(j)) % 2
                if not self.entries[i][j].has_parity(want):
                    return False
        return True

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        if (other.p, other.q) != (self.p, self.q) or other.pool != self.pool:
            return False
        return all(
            self.entries[i][j] == other.entries[i][j]
            for i in range(self.dim)
            for j in range(self.dim)
        )

    __hash__ = None

    def __repr__(self):
        rows = "; ".join(
            ", ".join(e.render() for e in row) for row in self.entries
        )
        return f"SuperMatrix({self.p}|{self.q}: [{rows}])"

    def blocks(self):
        p, q, E = self.p, self.q, self.entries
        A = [row[:p] for row in E[:p]]
        B = [row[p:] for row in E[:p]]
        C = [row[:p] for row in E[p:]]
        D = [row[p:] for row in E[p:]]
        return A, B, C, D

    # -- graded invariants ----------------------------------------------------

    def supertrace(self) -> Superfunction:
        """str M = sum_j (-1)^{|f_j|(|M|+1)} M[j][j] in an adapted right basis."""
        if not self.is_homogeneous():
            raise InhomogeneousMatrix("supertrace needs a homogeneous matrix")
        acc = self.pool.zero()
        for j in range(self.dim):
            sign = -1 if (self.slot_parity(j) * (self.parity + 1)) % 2 else 1
            acc = acc + self.entries[j][j] * sign
        return acc

    def berezinian(self) -> Superfunction:
        """Ber(M) = det(A - B D^-1 C) * det(D)^-1 for even invertible M."""
        if self.parity != 0:
            raise InhomogeneousMatrix("Berezinian is defined for even matrices")
        A, B, C, D = self.blocks()
        if self.q == 0:
            return _det_commuting(self.pool, A)
        try:
            Dinv = _invert_commuting(self.pool, D)
        except NonInvertible:
            raise NonInvertibleBlock("odd-odd block has singular body") from None
        p, q = self.p, self.q
        schur = [
            [
                A[i][j]
                - sum(
                    (B[i][k] * Dinv[k][l] * C[l][j] for k in range(q) for l in range(q)),
                    start=self.pool.zero(),
                )
                for j in range(p)
            ]
            for i in range(p)
        ]
        det_schur = _det_commuting(self.pool, schur) if p else self.pool.one()
        det_D = _det_commuting(self.pool, D)
        return det_schur * det_D.invert()

    def body_matrix(self):
        return [[e.body() for e in row] for row in self.entries]

    def inverse(self) -> "SuperMatrix":
        """Two-sided inverse via a finite Neumann series on the nilpotent part."""
        body = self.body_matrix()
        try:
            binv = _invert_body(body)
        except NonInvertible:
            raise NonInvertible("matrix body is singular") from None
        M0inv = SuperMatrix(
            self.pool,
            self.p,
            self.q,
            [[self.pool.scalar(e) for e in row] for row in binv],
            self.parity,
        )
        body_sm = SuperMatrix(
            self.pool,
            self.p,
            self.q,
            [[self.pool.scalar(e) for e in row] for row in body],
            self.parity,
        )
        N = self - body_sm
        T = M0inv * N  # nilpotent entries
        acc = SuperMatrix.identity(self.pool, self.p, self.q)
        power = SuperMatrix.identity(self.pool, self.p, self.q)
        sign = 1
        while True:
            power = power * T
            sign = -sign
            if all(e.is_zero() for row in power.entries for e in row):
                break
            acc = acc + power * self.pool.scalar(sign)
        return acc * M0inv


# -- commuting-entry helpers (all entries even, hence mutually commuting) ----


def _det_commuting(pool, rows) -> Superfunction:
    n = len(rows)
    if n == 0:
        return pool.one()
    if n == 1:
        return rows[0][0]
    acc = pool.zero()
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        term = rows[0][j] * _det_commuting(pool, minor)
        acc = acc + (term if j % 2 == 0 else -term)
    return acc


def _invert_commuting(pool, rows):
    """Gauss-Jordan over commuting (even) superfunction entries."""
    n = len(rows)
    a = [list(r) for r in rows]
    inv = [[pool.one() if i == j else pool.zero() for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not sp.cancel(a[r][col].body()) == 0:
                piv = r
                break
        if piv is None:
            raise NonInvertible("no invertible pivot")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        scale = a[col][col].invert()
        a[col] = [e * scale for e in a[col]]
        inv[col] = [e * scale for e in inv[col]]
        for r in range(n):
            if r == col or a[r][col].is_zero():
                continue
            f = a[r][col]
            a[r] = [a[r][k] - f * a[col][k] for k in range(n)]
            inv[r] = [inv[r][k] - f * inv[col][k] for k in range(n)]
    return inv


def _invert_body(rows):
    """Exact inverse of a matrix of rational functions (sympy exprs)."""
    n = len(rows)
    m = sp.Matrix(n, n, lambda i, j: sp.together(rows[i][j]))
    if sp.cancel(m.det()) == 0:
        raise NonInvertible("singular body matrix")
    inv = m.inv()
    return [[sp.cancel(inv[i, j]) for j in range(n)] for i in range(n)]


# -- the standard supermetric and the J map ----------------------------------


def standard_metric(pool: GeneratorPool, t: int, s: int, m: int) -> SuperMatrix:
    """g0 = diag(G_{t,s}, J_{2m}) with G = diag(-1_t, 1_s), J_2 = [[0,-1],[1,0]]."""
    dim = t + s + 2 * m
    g = SuperMatrix.zero(pool, t + s, 2 * m)
    for k in range(t):
        g.entries[k][k] = pool.scalar(-1)
    for k in range(t, t + s):
        g.entries[k][k] = pool.one()
    for l in range(m):
        a = t + s + 2 * l
        g.entries[a][a + 1] = pool.scalar(-1)
        g.entries[a + 1][a] = pool.one()
    return g


def j_map_signs(t: int, s: int, m: int):
    """The J map as (sign, target index) per basis slot: J e_k = sign * e_target."""
    out = []
    for k in range(t):
        out.append((-1, k))
    for k in range(t, t + s):
        out.append((1, k))
    for l in range(m):
        a = t + s + 2 * l
        out.append((1, a + 1))   # J e_a = e_{a+1}
        out.append((-1, a))      # J e_{a+1} = -e_a
    return out


def j_map(pool: GeneratorPool, t: int, s: int, m: int) -> SuperMatrix:
    """Signed permutation matrix of J in right-action convention:
    J e_k = sum_m e_m * J[m][k]."""
    J = SuperMatrix.zero(pool, t + s, 2 * m)
    for k, (sign, tgt) in enumerate(j_map_signs(t, s, m)):
        J.entries[tgt][k] = pool.scalar(sign)
    return J


# -- pairing of coefficient columns ------------------------------------------


def pair_columns(B: SuperMatrix, v, w, pv: int, pw: int) -> Superfunction:
    """B(v, w) for right-coefficient columns of declared parities pv, pw."""
    pool = B.pool
    acc = pool.zero()
    for a in range(B.dim):
        if v[a].is_zero():
            continue
        pa = (pv + B.slot_parity(a)) % 2
        for b in range(B.dim):
            if w[b].is_zero() or B.entries[a][b].is_zero():
                continue
            term = B.entries[a][b] * w[b] * v[a]
            acc = acc + (term if (pa * pw) % 2 == 0 else -term)
    return acc


def osp_algebra_check(L: SuperMatrix, t: int, s: int, m: int) -> bool:
    """True iff <Lv,w> = -(-1)^{|L||v|} <v,Lw> against g0 for all basis v, w."""
    residuals = osp_residuals(L, t, s, m)
    return all(r.is_zero() for row in residuals for r in row)


def osp_residuals(L: SuperMatrix, t: int, s: int, m: int):
    dim = t + s + 2 * m
    if L.dim != dim or (L.p, L.q) != (t + s, 2 * m):
        raise ValueError("matrix dimensions do not match the signature")
    pool = L.pool
    g0 = standard_metric(pool, t, s, m)
    out = []
    for i in range(dim):
        row = []
        pi = L.slot_parity(i)
        for j in range(dim):
            pj = L.slot_parity(j)
            acc = pool.zero()
            for k in range(dim):
                # <L e_i, e_j> = sum_k (-1)^{|L_ki| |e_j|} g0_{kj} L_{ki}
                pL = (L.parity + L.slot_parity(k) + pi) % 2
                t1 = g0.entries[k][j] * L.entries[k][i]
                acc = acc + (t1 if (pL * pj) % 2 == 0 else -t1)
                # (-1)^{|L||e_i|} <e_i, L e_j> = +- sum_k g0_{ik} L_{kj}
                t2 = g0.entries[i][k] * L.entries[k][j]
                acc = acc + (t2 if (L.parity * pi) % 2 == 0 else -t2)
            row.append(acc)
        out.append(row)
    return out


# -- graded Gram-Schmidt ------------------------------------------------------


def gram_schmidt_osp(B: SuperMatrix):
    """Change of basis E with B(E_i, E_j) = (g0)_{ij} exactly.

    Returns ``(E, (t, s, m))``.  B must be even, supersymmetric and have a
    nondegenerate body.  Pivot normalisations must be exact squares in the
    scalar ring; otherwise NotASquare propagates and the caller may rescale
    the form.  Basis vectors are ordered negatives, positives, odd pairs.
    """
    pool = B.pool
    if B.parity != 0:
        raise MetricViolation("evenness", "form matrix must be even")
    dim = B.dim
    if B.q % 2:
        raise MetricViolation("nondegeneracy", "odd dimension must be even")
    for i in range(dim):
        for j in range(dim):
            sign = -1 if B.slot_parity(i) * B.slot_parity(j) else 1
            if not (B.entries[i][j] - B.entries[j][i] * sign).is_zero():
                raise MetricViolation("supersymmetry", f"entry ({i},{j})")

    def pair(u, pu, w, pw):
        return pair_columns(B, u, w, pu, pw)

    def basis_col(i):
        return [pool.one() if r == i else pool.zero() for r in range(dim)]

    evens = [basis_col(i) for i in range(B.p)]
    odds = [basis_col(i) for i in range(B.p, dim)]
    negatives, positives, odd_pairs = [], [], []

    while evens:
        pick = None
        for idx, u in enumerate(evens):
            if sp.cancel(pair(u, 0, u, 0).body()) != 0:
                pick = idx
                break
        if pick is None:
            found = False
            for i, j in itertools.combinations(range(len(evens)), 2):
                if sp.cancel(pair(evens[i], 0, evens[j], 0).body()) != 0:
                    evens[i] = [evens[i][r] + evens[j][r] for r in range(dim)]
                    found = True
                    break
            if not found:
                raise MetricViolation("nondegeneracy", "even block body is degenerate")
            continue
        u = evens.pop(pick)
        c = pair(u, 0, u, 0)
        cinv = c.invert()
        # w -> w - u * (B(u,w)/B(u,u)) kills the pairing with u on both sides
        evens = [
            [w[r] - u[r] * (pair(u, 0, w, 0) * cinv) for r in range(dim)]
            for w in evens
        ]
        odds = [
            [w[r] - u[r] * (pair(u, 0, w, 1) * cinv) for r in range(dim)]
            for w in odds
        ]
        try:
            scale = c.sqrt().invert()
            sign = 1
        except NotASquare:
            scale = (-c).sqrt().invert()
            sign = -1
        u = [e * scale for e in u]
        (negatives if sign < 0 else positives).append(u)

    while odds:
        pick = None
        for i, j in itertools.combinations(range(len(odds)), 2):
            if sp.cancel(pair(odds[i], 1, odds[j], 1).body()) != 0:
                pick = (i, j)
                break
        if pick is None:
            raise MetricViolation("nondegeneracy", "odd block body is degenerate")
        i, j = pick
        f2 = odds.pop(j)
        f1 = odds.pop(i)
        c = pair(f1, 1, f2, 1)
        f2 = [e * (-c.invert()) for e in f2]  # now B(f1, f2) = -1, B(f2, f1) = 1
        odds = [
            [
                w[r] - f1[r] * pair(f2, 1, w, 1) + f2[r] * pair(f1, 1, w, 1)
                for r in range(dim)
            ]
            for w in odds
        ]
        odd_pairs.extend([f1, f2])

    cols = negatives + positives + odd_pairs
    E = SuperMatrix(
        B.pool,
        B.p,
        B.q,
        [[cols[j][r] for j in range(dim)] for r in range(dim)],
    )
    return E, (len(negatives), len(positives), len(odd_pairs) // 2)
