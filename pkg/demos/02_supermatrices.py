"""Supertrace, Berezinian and graded Gram-Schmidt on parity-graded matrices."""

from supergeo import GeneratorPool, SuperMatrix, standard_metric
from supergeo.supermatrix import gram_schmidt_osp, pair_columns

pool = GeneratorPool(["x"], ["th1", "th2"])
t12 = pool.odd("th1") * pool.odd("th2")

print("# the standard supermetric g0 = diag(G_{t,s}, J_{2m})")
g0 = standard_metric(pool, 1, 1, 1)
print(g0)

print()
print("# supertrace: block trace with adapted-basis signs")
print("str id(2|2) =", SuperMatrix.identity(pool, 2, 2).supertrace().render())
print("str id(3|2) =", SuperMatrix.identity(pool, 3, 2).supertrace().render())

print()
print("# Berezinian: multiplicative graded determinant")
M = SuperMatrix(pool, 1, 1, [[pool.scalar(2) + t12, pool.odd("th1")],
                             [pool.odd("th2"), pool.scalar(3)]])
N = SuperMatrix(pool, 1, 1, [[pool.scalar(1), pool.odd("th2")],
                             [pool.odd("th1") * 2, pool.scalar(1) + t12]])
print("Ber(M)        =", M.berezinian().render())
print("Ber(N)        =", N.berezinian().render())
print("Ber(MN)       =", (M * N).berezinian().render())
print("Ber(M)Ber(N)  =", (M.berezinian() * N.berezinian()).render())

print()
print("# graded Gram-Schmidt: reduce an admissible form to g0 exactly")
# even pivot 4 + 3 th1 th2 (an exact square after the nilpotent correction),
# odd block 2*J2
B = SuperMatrix(
    pool, 1, 2,
    [[pool.scalar(4) + t12 * 3, 0, 0], [0, 0, -2], [0, 2, 0]],
)
E, sig = gram_schmidt_osp(B)
print("signature (t, s, m) =", sig)
cols = [[E.entries[r][j] for r in range(3)] for j in range(3)]
for i in range(3):
    for j in range(3):
        v = pair_columns(B, cols[i], cols[j], 0 if i < 1 else 1, 0 if j < 1 else 1)
        if not v.is_zero():
            print(f"B(E_{i+1}, E_{j+1}) =", v.render())
