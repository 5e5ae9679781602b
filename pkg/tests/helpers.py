"""Random instance generators shared by the test modules."""

import numpy as np

from revcont.mechanism import Menu
from revcont.valuation import AllocationSpace

SPACES = list(AllocationSpace)


def random_allocations(rng, space, m, k):
    if space is AllocationSpace.ADDITIVE:
        q = rng.random((m, k))
        q[rng.random((m, k)) < 0.3] = 1.0
        q[rng.random((m, k)) < 0.2] = 0.0
        return q
    if space is AllocationSpace.UNIT_DEMAND:
        return rng.dirichlet(np.ones(k + 1), size=m)[:, :k]
    return rng.dirichlet(np.ones(k), size=m)


def random_menu(rng, space=AllocationSpace.ADDITIVE, k=None, max_entries=6):
    if k is None:
        k = int(rng.integers(1, 4))
    m = int(rng.integers(1, max_entries + 1))
    q = random_allocations(rng, space, m, k)
    s = rng.uniform(0, 5, m)
    if rng.random() < 0.3:
        s = np.round(s)  # integer prices make exact ties likely
    if space is AllocationSpace.IMPLEMENTATION:
        s[rng.integers(m)] = 0.0
    return Menu.build(zip(q, s), space, k=k)


def random_points(rng, n, k, integer=False):
    if integer:
        return rng.integers(0, 6, (n, k)).astype(float)
    return rng.uniform(0, 5, (n, k))
