"""Refinement sequences, finite filters, evaluation of names, permutations."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Optional, Sequence

from .arboreal import ArborealForcing, cohen, is_member, member_cone, member_inside
from .errors import (AmbiguousValue, DepthExceeded, DomainNotSuperset, InputError,
                     NotDecided, NotPreDense)
from .multi import (DEFAULT_BUDGET, DenseSet, DownSet, Multiforcing, Multitree, _Budget,
                    _compatible_witness, compatible, cw_union_seq, is_predense,
                    meet_member, mleq, mt_member)
from .names import RealName, force_outside, principal_name
from .refine import (DenseTask, RefinementTrace, System, generic_refine,
                     mandatory_tasks)
from .trees import cone, proj, restrict_clopen


def extend_domain(pi: Multiforcing, Z: Iterable[int], bound: int = 3) -> Multiforcing:
    """Pad pi with Cohen components on Z minus |pi|."""
    Z = {int(z) for z in Z}
    if not pi.support <= Z:
        raise DomainNotSuperset(f"{sorted(pi.support - Z)} not in Z")
    d = pi.as_dict()
    for z in Z - pi.support:
        d[z] = cohen(bound)
    return Multiforcing(d)


@dataclass
class MfSequence:
    terms: list
    certificates: list = field(default_factory=list)
    crucial_flags: list = field(default_factory=list)

    @classmethod
    def start(cls, pi: Multiforcing) -> "MfSequence":
        return cls([pi], [None], [False])

    def union(self) -> Multiforcing:
        return cw_union_seq(self.terms)


def step_extend(seq: MfSequence, tasks: Sequence[DenseTask] = (), Z: Optional[Iterable[int]] = None,
                seed: int = 0, depth: int = 4, k_max: int = 2, name_pool=(), dense_pool=(),
                avoid_pool=()) -> MfSequence:
    """Append a generic refinement of the union of seq (padded to Z).

    Every earlier term is passed to the engine as a chain, so the new term
    refines each of them.  The step counts as crucial when extra tasks were
    supplied on top of the mandatory ones.
    """
    if not seq.terms:
        raise InputError("start the sequence with MfSequence.start")
    pi = seq.union()
    if Z is not None:
        pi = extend_domain(pi, Z)
    mand = mandatory_tasks(pi, name_pool, dense_pool, depth, k_max, avoid_pool,
                           chain=seq.terms)
    rho, trace = generic_refine(pi, list(mand) + list(tasks), seed=seed, depth=depth)
    cert = {"trace": trace, "tasks": [t.id for t in mand] + [t.id for t in tasks]}
    crucial = bool(tasks) or bool(name_pool) or bool(dense_pool) or bool(avoid_pool)
    return MfSequence(seq.terms + [rho], seq.certificates + [cert],
                      seq.crucial_flags + [crucial])


@dataclass
class FiniteFilter:
    chain: list
    met: list = field(default_factory=list)

    @property
    def last(self) -> Multitree:
        return self.chain[-1]


def _descend(rng: random.Random, pi: Multiforcing, q: Multitree) -> Multitree:
    """Shrink one random component of q to a random child member."""
    keys = sorted(q.support)
    if not keys:
        return q
    xi = rng.choice(keys)
    X = proj(q[xi])
    L = X.depth + 1
    nodes = X.slice(L)
    rng.shuffle(nodes)
    for t in nodes:
        m = member_inside(pi[xi], restrict_clopen(X, t))
        if m is not None and mleq(Multitree({xi: m}), Multitree({xi: X})):
            d = q.as_dict()
            d[xi] = m
            return Multitree(d)
    return q


def _witness(D: DenseSet, pi: Multiforcing, base: Multiforcing, q: Multitree,
             rng: random.Random) -> Optional[Multitree]:
    """Some element of D compatible with q; candidates tried in seeded order."""
    if isinstance(D, DownSet):
        gens = list(D.gens)
        rng.shuffle(gens)
        return _compatible_witness(DownSet(D.id, gens), pi, base, q)
    opts, keys = [], []
    for xi, T in q.items:
        keys.append(xi)
        if xi in base and is_member(base[xi], T):
            opts.append([proj(T)])
        else:
            X = proj(T)
            opts.append([cone(t) for t in X.slice(X.depth)
                         if xi in base and member_cone(base[xi], t) is not None])
    combos = list(product(*opts))
    rng.shuffle(combos)
    for combo in combos:
        d = D.extend(base, Multitree(dict(zip(keys, combo))))
        if d is not None and D.member(d) and mt_member(base, d) and compatible(pi, q, d):
            return d
    return None


def build_filter(pi: Multiforcing, dense_list: Sequence[DenseSet], seed: int = 0,
                 budget: int = DEFAULT_BUDGET, start: Optional[Multitree] = None,
                 base: Optional[Multiforcing] = None, wander: int = 0,
                 shuffle: bool = False, check: bool = True) -> FiniteFilter:
    """A finite descending chain in MT(pi) meeting every listed set, in
    order (or in seeded order with shuffle).

    Sets are subsets of MT(base) (default pi).  Ties between witnesses are
    broken by the seed; after each meeting the chain may take `wander`
    random descents.
    """
    base = base or pi
    rng = random.Random(seed)
    b = _Budget("build_filter", budget)
    if check:
        for D in dense_list:
            if not is_predense(D, pi, base):
                raise NotPreDense(D.id)
    q = start if start is not None else Multitree()
    if not mt_member(pi, q):
        raise InputError("start condition outside MT(pi)")
    chain, met = [q], []
    order = list(dense_list)
    if shuffle:
        rng.shuffle(order)
    for D in order:
        b.tick()
        if not D.member(q):
            d = _witness(D, pi, base, q, rng)
            if d is None:
                raise NotPreDense(D.id)
            r = meet_member(pi, q, d)
            if r is None or not mleq(r, q) or not mleq(r, d) or not D.member(r):
                raise NotPreDense(D.id)
            q = r
            chain.append(q)
        met.append(D.id)
        for _ in range(wander):
            b.tick()
            q2 = _descend(rng, pi, q)
            if q2 != q:
                q = q2
                chain.append(q)
    return FiniteFilter(chain, met)


UNDEFINED = "?"


def eval_name(c: RealName, G: FiniteFilter) -> str:
    """Bits decided by the filter; '?' where undecided."""
    out = []
    for n in range(c.horizon):
        vals = set()
        for i in (0, 1):
            if any(mleq(p, x) for p in G.chain for x in c.K(n, i)):
                vals.add(i)
        if len(vals) == 2:
            raise AmbiguousValue(f"bit {n} decided both ways")
        out.append(str(vals.pop()) if vals else UNDEFINED)
    return "".join(out)


def defined_prefix(bits: str) -> str:
    i = bits.find(UNDEFINED)
    return bits if i < 0 else bits[:i]


def extract_real(G: FiniteFilter, xi: int, depth: int) -> str:
    """The common level-depth node of the xi-components of the chain."""
    X = None
    for p in G.chain:
        T = p.get(xi)
        if T is not None:
            X = proj(T)
    if X is None:
        raise NotDecided(f"index {xi} never appears in the filter")
    nodes = X.slice(depth)
    if len(nodes) != 1:
        raise NotDecided(f"{len(nodes)} nodes of length {depth} remain")
    return nodes[0]


def check_xik3(seq: MfSequence, xi: int, x: str) -> bool:
    """Every term containing xi has a generator with x as a node."""
    for P in seq.terms:
        if xi not in P:
            continue
        ok = False
        for G in P[xi].generators:
            if len(x) > G.exactness:
                raise DepthExceeded(len(x), G.exactness)
            if x in proj(G):
                ok = True
                break
        if not ok:
            return False
    return True


def real_outside_layer(pi: Multiforcing, xi: int, layer: ArborealForcing, length: int,
                       p: Optional[Multitree] = None) -> Optional[str]:
    """A string of the given length, forced for x_xi below p, lying outside
    every generator of the layer."""
    from .trees import union
    c = principal_name(xi, length)
    U = union(layer.generators)
    r = force_outside(pi, c, p or Multitree(), U, xi=xi)
    if r is None:
        return None
    X = proj(r[xi])
    s = X.stem()
    while len(s) < length:
        kids = [s + b for b in "01" if s + b in X]
        s = kids[0]
    return s[:length] if s[:length] not in U else None


class Permutation:
    """A finite involution of indices."""

    __slots__ = ("map",)

    def __init__(self, mapping: Mapping[int, int] = ()):
        m = {int(a): int(b) for a, b in dict(mapping).items() if int(a) != int(b)}
        for a, b in list(m.items()):
            m.setdefault(b, a)
        for a, b in m.items():
            if m.get(b, b) != a:
                raise InputError(f"not an involution at {a} -> {b}")
        self.map = dict(sorted(m.items()))

    @classmethod
    def swaps(cls, pairs) -> "Permutation":
        m = {}
        for a, b in pairs:
            if a in m or b in m:
                raise InputError("swaps must be disjoint")
            m[a], m[b] = b, a
        return cls(m)

    @property
    def nid(self) -> frozenset:
        return frozenset(self.map)

    def __call__(self, xi: int) -> int:
        return self.map.get(xi, xi)

    def compose(self, other: "Permutation") -> dict:
        keys = set(self.map) | set(other.map)
        return {k: self(other(k)) for k in keys if self(other(k)) != k}

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.map == other.map

    def __hash__(self):
        return hash(tuple(self.map.items()))

    def __repr__(self):
        return f"Permutation({self.map})"


def _perm_trace(h: Permutation, tr: RefinementTrace) -> RefinementTrace:
    def sysmap(phi):
        return System({(h(xi), k): T for (xi, k), T in phi.items})
    steps = [(n, sysmap(phi)) for n, phi in tr.steps]
    j_of = {(h(xi), k): j for (xi, k), j in tr.j_of.items()}
    wit = {}
    for (did, pkey, ukey), qs in tr.witnesses.items():
        pk = tuple(sorted((h(xi), st) for xi, st in pkey))
        uk = tuple(sorted((h(xi), k) for xi, k in ukey))
        wit[(did, pk, uk)] = [perm_apply(h, q) for q in qs]
    return RefinementTrace(steps, list(tr.schedule), j_of, list(tr.seal_levels), wit,
                           dict(tr.config))


def perm_apply(h: Permutation, x):
    """Relabel indices along h."""
    if isinstance(x, Multitree):
        return Multitree({h(xi): T for xi, T in x.items})
    if isinstance(x, Multiforcing):
        return Multiforcing({h(xi): P for xi, P in x.items})
    if isinstance(x, RealName):
        return RealName([(perm_apply(h, p), n, i) for p, n, i in x.triples], x.horizon)
    if isinstance(x, System):
        return System({(h(xi), k): T for (xi, k), T in x.items})
    if isinstance(x, RefinementTrace):
        return _perm_trace(h, x)
    if isinstance(x, FiniteFilter):
        return FiniteFilter([perm_apply(h, p) for p in x.chain], list(x.met))
    if isinstance(x, MfSequence):
        certs = [None if c is None else {"trace": _perm_trace(h, c["trace"]),
                                         "tasks": list(c["tasks"])}
                 for c in x.certificates]
        return MfSequence([perm_apply(h, P) for P in x.terms], certs, list(x.crucial_flags))
    raise InputError(f"cannot permute {type(x).__name__}")
