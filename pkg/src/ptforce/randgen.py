"""Seeded random objects for tests, benchmarks and the CLI."""
from __future__ import annotations

import random
from typing import Optional

from .arboreal import ArborealForcing
from .multi import Multiforcing, Multitree
from .names import RealName, bit_tree
from .trees import ClopenTree, cone, proj


def rng(seed) -> random.Random:
    return random.Random(seed)


def random_string(r: random.Random, max_len: int) -> str:
    n = r.randint(0, max_len)
    return "".join(r.choice("01") for _ in range(n))


def random_clopen(r: random.Random, depth: int = 3, max_stems: int = 4) -> ClopenTree:
    """A nonempty clopen tree with stems of length <= depth."""
    k = r.randint(1, max_stems)
    stems = []
    for _ in range(k):
        n = r.randint(0, depth)
        stems.append("".join(r.choice("01") for _ in range(n)))
    return ClopenTree.from_stems(stems)


def random_forcing(r: random.Random, max_gens: int = 6, depth: int = 3) -> ArborealForcing:
    return ArborealForcing([random_clopen(r, depth) for _ in range(r.randint(1, max_gens))])


def random_multiforcing(r: random.Random, max_indices: int = 3, max_gens: int = 6,
                        depth: int = 3, index_bound: int = 8) -> Multiforcing:
    n = r.randint(1, max_indices)
    idx = r.sample(range(index_bound), n)
    return Multiforcing({xi: random_forcing(r, max_gens, depth) for xi in idx})


def random_member(r: random.Random, P: ArborealForcing, extra: int = 2) -> ClopenTree:
    """A random member G|t of P (restriction of a generator)."""
    G = proj(r.choice(P.generators))
    s = r.choice(G.stems)
    for _ in range(r.randint(0, extra)):
        s += r.choice("01")
    return cone(s) if len(s) > len(G.stem()) or len(G.stems) == 1 else G


def random_multitree(r: random.Random, pi: Multiforcing, extra: int = 2) -> Multitree:
    keys = [xi for xi, _ in pi.items]
    chosen = [xi for xi in keys if r.random() < 0.6]
    return Multitree({xi: random_member(r, pi[xi], extra) for xi in chosen})


def random_name(r: random.Random, pi: Multiforcing, horizon: int = 3) -> RealName:
    """A pi-complete name: each bit is read off a randomly chosen index at a
    randomly chosen position, possibly flipped."""
    keys = [xi for xi, _ in pi.items]
    trip = []
    for n in range(horizon):
        xi = r.choice(keys)
        pos = r.randint(0, horizon)
        flip = r.randint(0, 1)
        for i in (0, 1):
            trip.append((Multitree({xi: bit_tree(pos, i ^ flip)}), n, i))
    return RealName(trip, horizon)


def random_dense(r: random.Random, pi: Multiforcing, id: Optional[str] = None):
    """An open dense set of the form 'below p0 or incompatible with p0'."""
    from .multi import cone_or_incompatible
    p0 = random_multitree(r, pi)
    return cone_or_incompatible(id or f"D{r.getrandbits(32):08x}", p0)
