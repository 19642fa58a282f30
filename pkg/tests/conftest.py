"""Shared fixtures: charts, metrics and seeded random element generators."""

import itertools
import random

import pytest

from supergeo import Chart, GeneratorPool
from supergeo.geometry import BilinearForm, VectorField, flat_metric


@pytest.fixture
def pool_x12():
    """One even variable, two odd coordinates."""
    return GeneratorPool(["x"], ["th1", "th2"])


@pytest.fixture
def chart_flat22():
    return Chart(["x", "y"], ["th1", "th2"], box={"x": (0, 1), "y": (0, 1)})


@pytest.fixture
def chart_classical():
    return Chart(["x", "y"], [], box={"x": (1, 2), "y": (1, 2)})


@pytest.fixture
def chart_deformed():
    return Chart(["x"], ["th1", "th2"], box={"x": (0, 1)})


@pytest.fixture
def metric_flat22(chart_flat22):
    return flat_metric(chart_flat22)


@pytest.fixture
def metric_curved(chart_classical):
    x = chart_classical.pool.even("x")
    return BilinearForm(chart_classical, [[1, 0], [0, x * x]])


@pytest.fixture
def metric_deformed(chart_deformed):
    pool = chart_deformed.pool
    bump = pool.one() + pool.odd("th1") * pool.odd("th2")
    return BilinearForm(chart_deformed, [[bump, 0, 0], [0, 0, -1], [0, 1, 0]])


def random_superfunction(pool, rng, parity=None, max_degree=2, coeff_range=2,
                         allow_flesh=True):
    """Random element with small integer coefficients; homogeneous if parity given."""
    n_odd = pool.n_odd if allow_flesh else pool.n_coordinate_odd
    out = pool.zero()
    for size in range(n_odd + 1):
        for mono in itertools.combinations(range(n_odd), size):
            if parity is not None and size % 2 != parity % 2:
                continue
            if rng.random() < 0.4:
                continue
            c = rng.randint(-coeff_range, coeff_range)
            if not c:
                continue
            term = pool.scalar(c)
            for sym in pool.even_symbols:
                d = rng.randint(0, max_degree)
                if d:
                    term = term * pool.scalar(sym**d)
            for i in mono:
                term = term * pool.odd(pool.odd_names[i])
            out = out + term
    return out


def random_field(chart, rng, parity, max_degree=1, allow_flesh=True):
    comps = [
        random_superfunction(
            chart.pool, rng, (parity + chart.parity(k)) % 2, max_degree,
            allow_flesh=allow_flesh,
        )
        for k in range(chart.dim)
    ]
    return VectorField(chart, comps, parity)


def seeded(seed):
    return random.Random(seed)
