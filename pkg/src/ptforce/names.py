"""Real names, direct forcing, completeness, non-principality, avoidance."""
from __future__ import annotations

import hashlib
from itertools import product
from typing import Iterable, Optional

from .arboreal import member_cone, member_inside
from .errors import InputError, NoSplitLevel, SearchBudgetExceeded
from .multi import (DEFAULT_BUDGET, DenseSet, DownSet, Multiforcing, Multitree,
                    _Budget, _pkey, compatible, family, meet_member, mleq, mseals,
                    sad)
from .trees import ClopenTree, Tree, proj, restrict_clopen


class RealName:
    """Triples (p, n, i) read as "p forces bit n to be i", below a horizon."""

    __slots__ = ("triples", "horizon", "_K", "id")

    def __init__(self, triples: Iterable, horizon: int, id: Optional[str] = None):
        trip = []
        for p, n, i in triples:
            n, i = int(n), int(i)
            if i not in (0, 1):
                raise InputError(f"bit must be 0 or 1, got {i}")
            if not 0 <= n < horizon:
                raise InputError(f"position {n} outside horizon {horizon}")
            trip.append((p, n, i))
        trip.sort(key=lambda e: (e[1], e[2], _pkey(e[0])))
        uniq = []
        for e in trip:
            if not uniq or uniq[-1] != e:
                uniq.append(e)
        self.triples = tuple(uniq)
        self.horizon = int(horizon)
        self._K = {}
        for p, n, i in self.triples:
            self._K.setdefault((n, i), []).append(p)
        self.id = id or "c" + hashlib.sha1(repr(self.key()).encode()).hexdigest()[:10]

    def key(self):
        return (self.horizon, tuple((_pkey(p), n, i) for p, n, i in self.triples))

    def K(self, n: int, i: int) -> tuple:
        return tuple(self._K.get((n, i), ()))

    def Kn(self, n: int) -> tuple:
        return self.K(n, 0) + self.K(n, 1)

    @property
    def support(self) -> frozenset:
        out = set()
        for p, _, _ in self.triples:
            out |= p.support
        return frozenset(out)

    def __eq__(self, other):
        return isinstance(other, RealName) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"RealName(horizon={self.horizon}, triples={len(self.triples)})"


def bit_tree(n: int, i: int) -> ClopenTree:
    """{t : lh(t) <= n or t(n) = i}."""
    if n == 0:
        return ClopenTree._raw((str(i),))
    stems = [format(w, f"0{n}b") + str(i) for w in range(1 << n)]
    return ClopenTree._raw(tuple(sorted(stems)))


def principal_name(xi: int, horizon: int) -> RealName:
    """Name of the generic real at index xi."""
    trip = [(Multitree({xi: bit_tree(n, i)}), n, i)
            for n in range(horizon) for i in (0, 1)]
    return RealName(trip, horizon, id=f"x{xi}h{horizon}")


def is_real_name(c: RealName) -> bool:
    for n in range(c.horizon):
        for p in c.K(n, 0):
            for q in c.K(n, 1):
                if not sad(p, q):
                    return False
    return True


def in_pi(c: RealName, pi: Multiforcing) -> bool:
    """Whether every condition of c already lies in MT(pi)."""
    from .multi import mt_member
    return all(mt_member(pi, p) for p, _, _ in c.triples)


def cone_set(c: RealName, pi: Multiforcing, n: int) -> list:
    gens = c.Kn(n)
    return [p for p in family(pi) if any(mleq(p, q) for q in gens)]


def cone_dense(c: RealName, n: int) -> DownSet:
    return DownSet(f"{c.id}:K{n}", c.Kn(n))


def is_complete(c: RealName, pi: Multiforcing, depth: Optional[int] = None) -> bool:
    fam = family(pi)
    for n in range(c.horizon):
        gens = [x for x in c.Kn(n) if x.support <= pi.support]
        for p in fam:
            if not any(compatible(pi, p, x) for x in gens):
                return False
    return True


def directly_forces_value(p: Multitree, c: RealName, n: int, i: int) -> bool:
    return any(mleq(p, q) for q in c.K(n, i))


def forced_prefix(p: Multitree, c: RealName) -> str:
    bits = []
    for n in range(c.horizon):
        if directly_forces_value(p, c, n, 0):
            bits.append("0")
        elif directly_forces_value(p, c, n, 1):
            bits.append("1")
        else:
            break
    return "".join(bits)


def directly_forces_prefix(p: Multitree, c: RealName, s: str) -> bool:
    return all(directly_forces_value(p, c, n, int(b)) for n, b in enumerate(s))


def directly_forces_avoid(p: Multitree, c: RealName, T: Tree) -> bool:
    return forced_prefix(p, c) not in proj(T)


def decide_value(pi: Multiforcing, c: RealName, p: Multitree, n: int):
    """(i, q) with q <= p in MT(pi) directly forcing bit n to be i."""
    if not 0 <= n < c.horizon:
        raise InputError(f"position {n} outside horizon {c.horizon}")
    for i in (0, 1):
        if directly_forces_value(p, c, n, i):
            return i, p
    for i in (0, 1):
        for x in c.K(n, i):
            if compatible(pi, p, x):
                q = meet_member(pi, p, x)
                if q is not None and mleq(q, x):
                    return i, q
    raise SearchBudgetExceeded(f"decide_value(n={n})", 0)


def force_avoid(pi: Multiforcing, c: RealName, p: Multitree, T: Tree):
    """(s, q): s in T and q <= p directly forcing the name out of [T|s]."""
    X = proj(T)
    lim = c.horizon
    if T.exactness < lim:
        lim = int(T.exactness)
    n = next((m for m in range(lim + 1) if X.count(m) >= 2), None)
    if n is None:
        raise NoSplitLevel(f"no level <= {lim} with two strings")
    q = p
    for m in range(n):
        _, q = decide_value(pi, c, q, m)
    t = forced_prefix(q, c)[:n]
    s = next(w for w in X.slice(n) if w != t)
    return s, q


def _with_index(pi: Multiforcing, r: Multitree, xi: int) -> Multitree:
    if xi in r.support:
        return r
    d = r.as_dict()
    d[xi] = proj(pi[xi].generators[0])
    return Multitree(d)


def force_outside(pi: Multiforcing, c: RealName, p: Multitree, T: Tree,
                  xi: Optional[int] = None, budget: int = DEFAULT_BUDGET) -> Optional[Multitree]:
    """Some r <= p in MT(pi) whose forced prefix leaves T (and whose support
    contains xi when given); depth-first, outside-first, bits in order."""
    X = proj(T)
    b = _Budget("force_outside", budget)
    start = p if xi is None else _with_index(pi, p, xi)

    def rec(r):
        b.tick()
        s = forced_prefix(r, c)
        if s not in X:
            return r
        m = len(s)
        if m >= c.horizon:
            return None
        opts = []
        for i in (0, 1):
            for x in c.K(m, i):
                if compatible(pi, r, x):
                    q = meet_member(pi, r, x)
                    if q is not None and mleq(q, x):
                        opts.append((s + str(i) in X, i, q))
        opts.sort(key=lambda e: (e[0], e[1]))
        for _, _, q in opts:
            res = rec(q)
            if res is not None:
                return res
        return None
    return rec(start)


def _quick_escape(pi, c, xi, p, budget):
    r = _with_index(pi, p, xi)
    for _ in range(4 * (c.horizon + 2)):
        budget.tick()
        s = forced_prefix(r, c)
        X = proj(r[xi])
        if s not in X:
            return r
        others = [w for w in X.slice(len(s)) if w != s] if s else []
        if others:
            w = others[0]
            m = member_inside(pi[xi], restrict_clopen(X, w))
            if m is None:
                return None
            d = r.as_dict()
            d[xi] = m
            r = Multitree(d)
            continue
        if len(s) >= c.horizon:
            return None
        moved = False
        for prefer_out in (True, False):
            for i in (0, 1):
                if ((s + str(i)) not in X) != prefer_out:
                    continue
                for x in c.K(len(s), i):
                    if compatible(pi, r, x):
                        q = meet_member(pi, r, x)
                        if q is not None and mleq(q, x):
                            r, moved = q, True
                            break
                if moved:
                    break
            if moved:
                break
        if not moved:
            return None
    return None


def _exhaustive_escape(pi, c, xi, p, budget):
    """Exhaustive search over conditions whose relevant components are
    cones at one level H; exact because membership in the set is
    witnessed by such a condition whenever it is witnessed at all."""
    R = sorted((c.support | {xi}) & pi.support)
    kd = 0
    for q, _, _ in c.triples:
        for _, T in q.items:
            kd = max(kd, proj(T).depth)
    g = max(pi[z].max_depth for z in R)
    H = max(c.horizon + 1, kd, g)
    opts = []
    for z in R:
        base = proj(p[z]) if z in p.support else pi[z].union
        opts.append([t for t in base.slice(H) if member_cone(pi[z], t) is not None])
    for combo in product(*opts):
        budget.tick()
        d = p.as_dict()
        for z, t in zip(R, combo):
            d[z] = ClopenTree._raw((t,))
        q = Multitree(d)
        if forced_prefix(q, c) not in q[xi]:
            return q
    return None


def find_escape(pi: Multiforcing, c: RealName, xi: int, p: Multitree,
                budget: int = DEFAULT_BUDGET) -> Optional[Multitree]:
    """q <= p with xi in |q| directly forcing the name out of [q(xi)]."""
    b = _Budget("is_nonprincipal", budget)
    r = _quick_escape(pi, c, xi, p, b)
    if r is not None:
        return r
    return _exhaustive_escape(pi, c, xi, p, b)


def is_nonprincipal(c: RealName, pi: Multiforcing, xi: int, depth: Optional[int] = None,
                    budget: int = DEFAULT_BUDGET) -> bool:
    """Density of {p : xi in |p|, p directly forces c outside [p(xi)]} over
    the generating family (openness holds by monotonicity)."""
    if c.horizon == 0 or xi not in pi.support:
        return False
    for p in family(pi):
        if find_escape(pi, c, xi, p, budget) is None:
            return False
    return True


def avoid_dense(c: RealName, xi: int, Q: Tree, id: Optional[str] = None) -> DenseSet:
    """{r : xi in |r|, r directly forces c outside [Q]}."""
    X = proj(Q)

    def member(y):
        return xi in y.support and forced_prefix(y, c) not in X

    def extend(pi, y):
        return force_outside(pi, c, y, X, xi=xi)
    if id is None:
        id = f"avoid:{c.id}:{xi}:" + hashlib.sha1(repr(X.stems).encode()).hexdigest()[:8]
    return DenseSet(id, member, extend)


def avoid_set(pi: Multiforcing, c: RealName, xi: int, Q: Tree) -> list:
    X = proj(Q)
    return [r for r in family(pi)
            if xi in r.support and forced_prefix(r, c) not in X]


def name_sealed(pi: Multiforcing, c: RealName, rho: Multiforcing, depth: int,
                hints: Optional[dict] = None, levels=None) -> bool:
    return all(mseals(pi, cone_dense(c, n), rho, depth, hints, levels).holds
               for n in range(c.horizon))


def force_decided(pi: Multiforcing, c: RealName, p: Multitree, T: Optional[Tree] = None,
                  xi: Optional[int] = None) -> Multitree:
    """Greedily decide bits up to the horizon, preferring values that leave
    T; stops early once the forced prefix is outside T."""
    X = proj(T) if T is not None else None
    r = p if xi is None else _with_index(pi, p, xi)
    while True:
        s = forced_prefix(r, c)
        if X is not None and s not in X:
            return r
        if len(s) >= c.horizon:
            return r
        best = None
        for i in (0, 1):
            for x in c.K(len(s), i):
                if compatible(pi, r, x):
                    q = meet_member(pi, r, x)
                    if q is not None and mleq(q, x):
                        key = ((X is not None and (s + str(i)) in X), i)
                        if best is None or key < best[0]:
                            best = (key, q)
                        break
        if best is None:
            return r
        r = best[1]
