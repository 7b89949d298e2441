"""Shared generators for randomized property tests (seeded, reproducible)."""

from truncgibbs.kernel import build_kernel


def _lex_positive(z):
    for c in z:
        if c:
            return c > 0
    return False


def random_kernel(rng, dimension=None, max_reach=3):
    """A random finitely supported symmetric normalized kernel.

    Only half-space offsets are drawn; the builder fills in the mirrors.
    """
    d = dimension if dimension is not None else int(rng.integers(1, 3))
    n_offsets = int(rng.integers(1, 4))
    raw = {}
    while not raw:
        for _ in range(n_offsets):
            z = tuple(int(c) for c in rng.integers(-max_reach, max_reach + 1, d))
            if _lex_positive(z):
                raw[z] = float(rng.uniform(0.1, 2.0))
    return build_kernel(d, raw)


def random_volume(rng, dimension, max_sites=4, span=5):
    """A random set of distinct sites inside a small box."""
    n = int(rng.integers(1, max_sites + 1))
    sites = set()
    while len(sites) < n:
        sites.add(tuple(int(c) for c in rng.integers(-span, span + 1, dimension)))
    return sorted(sites)
