"""Berezin-box integration, the harmonic action, and the scenario runner."""

from supergeo import Chart
from supergeo.geometry import flat_metric
from supergeo.integration import action, integrate, volume_density
from supergeo.morphisms import HarmonicSetup, Morphism
from supergeo.scenario import run_scenario

print("# Berezin + box integration is exact rational arithmetic")
chart = Chart(["x"], ["th1", "th2"], box={"x": (0, 2)})
pool = chart.pool
vol = volume_density(flat_metric(chart))
f = pool.even("x") * pool.odd("th1") * pool.odd("th2")
print("int_0^2 x th1 th2 =", integrate(f, vol))

print()
print("# harmonic action of identity maps")
plane = Chart(["x", "y"], [], box={"x": (0, 1), "y": (0, 1)})
g = flat_metric(plane)
print("A(id) on flat (0,2|0), box [0,1]^2:",
      action(HarmonicSetup(Morphism.identity(plane), g, g)))
flat22 = Chart(["x", "y"], ["th1", "th2"], box={"x": (0, 1), "y": (0, 1)})
g22 = flat_metric(flat22)
print("A(id) on flat (0,2|2), box [0,1]^2:",
      action(HarmonicSetup(Morphism.identity(flat22), g22, g22)),
      "(the supertrace cancels: (t+s) - 2m = 0)")

print()
print("# the same capabilities drive the scenario runner / CLI")
scenario = """
[chart]
even = x y
odd = th1 th2
flesh = 0
box x = 0 1
box y = 0 1

[metric g]
x,x = 1
y,y = 1
th1,th2 = -1

[vectorfield R]
x = -y
y = x

[run]
validate-metric g
check-killing R g --mode all
solve-killing g --degree 1
"""
report = run_scenario(scenario, name="inline-demo", seed=0)
print(report.render())
print("exit code:", report.exit_code)
print("the same report comes from: supergeo run <file> [--report out.txt]")
