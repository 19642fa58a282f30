"""Exact Grassmann arithmetic: products, derivatives, inverses, square roots.

Everything below is computed exactly, in rational arithmetic; there is no
floating point anywhere in the package.
"""

from supergeo import GeneratorPool

pool = GeneratorPool(["x"], ["th1", "th2"], ["lam1"])
x = pool.even("x")
th1, th2, lam1 = pool.odd("th1"), pool.odd("th2"), pool.odd("lam1")

print("# products pick up Koszul signs and nilpotency")
print("th2*th1          =", (th2 * th1).render())
print("(th1*th2)*th1    =", ((th1 * th2) * th1).render())
print("(x+th1 th2)(x-th1 th2) =", ((x + th1 * th2) * (x - th1 * th2)).render())

print()
print("# left odd derivatives")
f = th1 * th2
print("d/dth1 (th1 th2) =", f.partial("th1").render())
print("d/dth2 (th1 th2) =", f.partial("th2").render())
print("d/dx   (x^2 th1) =", (x * x * th1).partial("x").render())

print()
print("# inverses terminate because the nilpotent part is finite")
g = pool.one() + th1 * th2
print("1/(1+th1 th2)    =", g.invert().render())
print("check product    =", (g * g.invert()).render())

print()
print("# exact square roots (body must be an exact square)")
h = pool.scalar(4) + th1 * th2
r = h.sqrt()
print("sqrt(4+th1 th2)  =", r.render())
print("square it        =", (r * r).render())

print()
print("# Berezin extraction reads the top odd-coordinate coefficient")
print("top of 3x th2 th1 =", (x * th2 * th1 * 3).berezin_top())
print("flesh generators are constants: lam1 tags odd parameters, e.g.")
print("  (x + th1 lam1) =", (x + th1 * lam1).render())
