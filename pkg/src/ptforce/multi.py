"""Multitrees, multiforcings, the product MT(pi) and its sealing checker."""
from __future__ import annotations

from itertools import product
from typing import Callable, Iterable, Mapping, Optional, Sequence

from . import kernels as K
from .arboreal import (ArborealForcing, RefinementVerdict, _tree_key, is_member,
                       is_regular, member_cone, member_inside, refines)
from .errors import PreconditionError, RegularityViolated, SearchBudgetExceeded
from .trees import ClopenTree, Tree, cone, proj, restrict_clopen, subset

DEFAULT_BUDGET = 10 ** 6


class Multitree:
    """A finite map from indices to trees; a forcing condition."""

    __slots__ = ("items", "_key")

    def __init__(self, assignment: Mapping[int, Tree] = ()):
        items = dict(assignment)
        self.items = tuple(sorted((int(k), v) for k, v in items.items()))
        self._key = tuple((k, _tree_key(v)) for k, v in self.items)

    @property
    def support(self) -> frozenset:
        return frozenset(k for k, _ in self.items)

    def __getitem__(self, xi):
        for k, v in self.items:
            if k == xi:
                return v
        raise KeyError(xi)

    def get(self, xi, default=None):
        for k, v in self.items:
            if k == xi:
                return v
        return default

    def as_dict(self) -> dict:
        return dict(self.items)

    def restrict_to(self, idx) -> "Multitree":
        return Multitree({k: v for k, v in self.items if k in idx})

    def without(self, idx) -> "Multitree":
        return Multitree({k: v for k, v in self.items if k not in idx})

    def merge(self, other: "Multitree") -> "Multitree":
        d = self.as_dict()
        d.update(other.as_dict())
        return Multitree(d)

    def __eq__(self, other):
        return isinstance(other, Multitree) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __len__(self):
        return len(self.items)

    def __bool__(self):
        return True

    def __repr__(self):
        inner = ", ".join(f"{k}: {list(proj(v).stems)}" for k, v in self.items)
        return f"Multitree({{{inner}}})"


EMPTY = Multitree()


class Multiforcing:
    """A finite map from indices to arboreal forcings."""

    __slots__ = ("items", "_key")

    def __init__(self, assignment: Mapping[int, ArborealForcing] = ()):
        items = dict(assignment)
        self.items = tuple(sorted((int(k), v) for k, v in items.items()))
        self._key = tuple((k, v._key) for k, v in self.items)

    @property
    def support(self) -> frozenset:
        return frozenset(k for k, _ in self.items)

    def __getitem__(self, xi) -> ArborealForcing:
        for k, v in self.items:
            if k == xi:
                return v
        raise KeyError(xi)

    def __contains__(self, xi):
        return any(k == xi for k, _ in self.items)

    def as_dict(self) -> dict:
        return dict(self.items)

    def __eq__(self, other):
        return isinstance(other, Multiforcing) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return f"Multiforcing({dict(self.items)!r})"


def mt_member(pi: Multiforcing, p: Multitree) -> bool:
    if not p.support <= pi.support:
        return False
    return all(is_member(pi[xi], T) for xi, T in p.items)


def mleq(q: Multitree, p: Multitree) -> bool:
    """q <= p: support of p inside support of q, componentwise inclusion."""
    if not p.support <= q.support:
        return False
    return all(subset(q[xi], T) for xi, T in p.items)


def sad(p: Multitree, q: Multitree) -> bool:
    """Somewhere almost disjoint: a.d. components at a common index."""
    for xi, T in p.items:
        S = q.get(xi)
        if S is not None and K.disjoint(proj(T).stems, proj(S).stems):
            return True
    return False


def compatible(pi: Multiforcing, p: Multitree, q: Multitree) -> bool:
    """Some r in MT(pi) lies below both p and q."""
    for xi in p.support | q.support:
        if xi not in pi:
            return False
        X = pi[xi].union.stems
        for r in (p, q):
            T = r.get(xi)
            if T is not None:
                X = K.meet(X, proj(T).stems)
        if not X:
            return False
    return True


def meet_member(pi: Multiforcing, p: Multitree, q: Multitree) -> Optional[Multitree]:
    """A member of MT(pi) below p and q, preferring existing components."""
    out = {}
    for xi in sorted(p.support | q.support):
        if xi not in pi:
            return None
        P = pi[xi]
        a, b = p.get(xi), q.get(xi)
        if a is not None and b is not None:
            if subset(a, b) and is_member(P, a):
                out[xi] = proj(a)
                continue
            if subset(b, a) and is_member(P, b):
                out[xi] = proj(b)
                continue
            X = K.meet(proj(a).stems, proj(b).stems)
            if not X:
                return None
            m = member_inside(P, ClopenTree._raw(X))
        else:
            c = a if a is not None else b
            m = proj(c) if is_member(P, c) else member_inside(P, c)
        if m is None:
            return None
        out[xi] = m
    return Multitree(out)


def _member_pieces(P: ArborealForcing, X: ClopenTree) -> list:
    """Split [X] (inside the union of P) into members."""
    if is_member(P, X):
        return [X]
    out = []
    stack = list(X.stems)
    limit = P.max_depth
    while stack:
        a = stack.pop(0)
        c = member_cone(P, a)
        if c is not None:
            out.append(c)
        elif len(a) < limit:
            stack.extend(s for s in (a + "0", a + "1") if K.contains_node(P.union.stems, s))
    return out


def meet_cover(pi: Multiforcing, p: Multitree, q: Multitree) -> Optional[list]:
    """A finite R in MT(pi) with the union of [r] equal to [p] meet [q]."""
    if sad(p, q):
        return None
    for xi in p.support | q.support:
        if xi in pi and not is_regular(pi[xi]):
            raise RegularityViolated(f"component {xi} is not regular")
    if p == q:
        return [p]
    choices = []
    keys = sorted(p.support | q.support)
    for xi in keys:
        if xi not in pi:
            raise PreconditionError(f"index {xi} outside the multiforcing")
        a, b = p.get(xi), q.get(xi)
        if a is not None and b is not None:
            X = ClopenTree._raw(K.meet(proj(a).stems, proj(b).stems))
        else:
            X = proj(a if a is not None else b)
        X = ClopenTree._raw(K.meet(X.stems, pi[xi].union.stems))
        choices.append(_member_pieces(pi[xi], X))
    return [Multitree(dict(zip(keys, combo))) for combo in product(*choices)]


def cw_union(pi: Multiforcing, rho: Multiforcing) -> Multiforcing:
    """Componentwise union: generator lists concatenated per index."""
    out = pi.as_dict()
    for xi, R in rho.items:
        if xi in out:
            out[xi] = ArborealForcing(out[xi].generators + R.generators)
        else:
            out[xi] = R
    return Multiforcing(out)


def cw_union_seq(seq: Sequence[Multiforcing]) -> Multiforcing:
    out = Multiforcing()
    for pi in seq:
        out = cw_union(out, pi)
    return out


def family(pi: Multiforcing) -> list:
    """Generating family of MT(pi): supports inside |pi|, generator components."""
    keys = [xi for xi, _ in pi.items]
    opts = [[None] + [proj(g) for g in pi[xi].generators] for xi in keys]
    out = []
    for combo in product(*opts):
        out.append(Multitree({k: v for k, v in zip(keys, combo) if v is not None}))
    return out


def mrefines(pi: Multiforcing, rho: Multiforcing, depth: int) -> RefinementVerdict:
    fails = []
    for xi in sorted(pi.support - rho.support):
        fails.append(("domain", xi))
    for xi, P in pi.items:
        if xi in rho:
            for clause, wit in refines(P, rho[xi], depth).failures:
                fails.append((clause, (xi, wit)))
    return RefinementVerdict.of(depth, fails)


# boxes: dicts index -> stem tuple, standing for products of clopen sets

def _box(u: Multitree) -> dict:
    return {xi: proj(T).stems for xi, T in u.items}


def _box_minus(a: dict, b: dict) -> list:
    keys = sorted(a)
    inter = {}
    for xi in keys:
        m = K.meet(a[xi], b[xi]) if xi in b else a[xi]
        if not m:
            return [a]
        inter[xi] = m
    out = []
    prefix = {}
    for xi in keys:
        if xi in b:
            d = K.diff(a[xi], b[xi])
            if d:
                piece = dict(a)
                piece.update(prefix)
                piece[xi] = d
                out.append(piece)
        prefix[xi] = inter[xi]
    return out


def box_covered(u: Multitree, vs: Iterable[Multitree]) -> bool:
    boxes = [_box(u)]
    for v in vs:
        vb = _box(v)
        nxt = []
        for b in boxes:
            nxt.extend(_box_minus(b, vb))
        boxes = nxt
        if not boxes:
            return True
    return not boxes


def sqfv(u: Multitree, D: Sequence[Multitree]) -> Optional[tuple]:
    """A finite subfamily of D with supports equal to |u| covering [u]."""
    cands = [v for v in D if v.support == u.support]
    chosen = []
    boxes = [_box(u)]
    for v in cands:
        if not boxes:
            break
        vb = _box(v)
        nxt = []
        for b in boxes:
            nxt.extend(_box_minus(b, vb))
        if len(nxt) != len(boxes) or any(x is not y for x, y in zip(nxt, boxes)):
            chosen.append(v)
        boxes = nxt
    if boxes:
        return None
    for v in list(chosen):
        rest = [x for x in chosen if x is not v]
        if rest and box_covered(u, rest):
            chosen = rest
    return tuple(chosen)


class DenseSet:
    """A set of multitrees given by a membership test and an extender.

    extend(pi, y) returns some r <= y in the set and in MT(pi), or None.
    """

    def __init__(self, id: str, member: Callable, extend: Callable):
        self.id = id
        self._member = member
        self._extend = extend

    def member(self, y: Multitree) -> bool:
        return self._member(y)

    def extend(self, pi: Multiforcing, y: Multitree) -> Optional[Multitree]:
        return self._extend(pi, y)

    def __repr__(self):
        return f"DenseSet({self.id!r})"


class DownSet(DenseSet):
    """All multitrees below one of finitely many generators."""

    def __init__(self, id: str, gens: Sequence[Multitree]):
        self.id = id
        self.gens = tuple(gens)

    def member(self, y: Multitree) -> bool:
        return any(mleq(y, x) for x in self.gens)

    def extend(self, pi: Multiforcing, y: Multitree) -> Optional[Multitree]:
        for x in self.gens:
            if compatible(pi, y, x):
                r = meet_member(pi, y, x)
                if r is not None:
                    return r
        return None

    def __repr__(self):
        return f"DownSet({self.id!r}, {len(self.gens)} gens)"


def cone_or_incompatible(id: str, p0: Multitree) -> DenseSet:
    """Open dense: below p0, or incompatible with it."""
    def member(y):
        return mleq(y, p0) or sad(y, p0)

    def extend(pi, y):
        if sad(y, p0):
            return y if mt_member(pi, y) else None
        r = meet_member(pi, y, p0)
        if r is None:
            return y if mt_member(pi, y) else None
        return r
    ds = DenseSet(id, member, extend)
    ds.p0 = p0
    return ds


def is_dense(D: DenseSet, pi: Multiforcing) -> bool:
    for p in family(pi):
        r = D.extend(pi, p)
        if r is None or not mleq(r, p) or not D.member(r) or not mt_member(pi, r):
            return False
    return True


def is_predense(D: DenseSet, pi: Multiforcing, base: Optional[Multiforcing] = None) -> bool:
    """Every generating-family condition of pi is compatible with some
    element of D; D lives in MT(base) (default pi)."""
    base = base or pi
    for p in family(pi):
        if _compatible_witness(D, pi, base, p) is None:
            return False
    return True


def _compatible_witness(D, pi, base, p) -> Optional[Multitree]:
    if isinstance(D, DownSet):
        for x in D.gens:
            if x.support <= base.support and compatible(pi, p, x) and compatible(base, x, x):
                r = meet_member(pi, p, x)
                if r is not None:
                    return x
        return None
    opts = []
    keys = []
    for xi, T in p.items:
        keys.append(xi)
        if xi in base and is_member(base[xi], T):
            opts.append([proj(T)])
        else:
            X = proj(T)
            cands = [cone(t) for t in X.slice(X.depth)
                     if xi in base and member_cone(base[xi], t) is not None]
            opts.append(cands)
    for combo in product(*opts):
        d0 = Multitree(dict(zip(keys, combo)))
        d = D.extend(base, d0)
        if d is not None and D.member(d) and mt_member(base, d) and compatible(pi, p, d):
            return d
    return None


# sealing

def _u_choices(rho: Multiforcing, free: Sequence[int]):
    opts = [[None] + list(range(len(rho[xi].generators))) for xi in free]
    for combo in product(*opts):
        yield tuple((xi, k) for xi, k in zip(free, combo) if k is not None)


def _pkey(p: Multitree):
    return tuple((xi, proj(T).stems) for xi, T in p.items)


def _boxes(rho: Multiforcing, ukey, L: int, pi: Multiforcing):
    """Level-L boxes of u with their covering conditions v_s, or None if
    some v_s is not a member of pi."""
    per = []
    for xi, k in ukey:
        Q = proj(rho[xi].generators[k])
        vs = []
        for s in Q.slice(L):
            stem = restrict_clopen(Q, s).stem()
            c = member_cone(pi[xi], stem)
            if c is None:
                return None
            vs.append(c)
        per.append(vs)
    keys = [xi for xi, _ in ukey]
    return [Multitree(dict(zip(keys, combo))) for combo in product(*per)]


class _Budget:
    def __init__(self, what, limit):
        self.what, self.limit, self.used = what, limit, 0

    def tick(self, n=1):
        self.used += n
        if self.used > self.limit:
            raise SearchBudgetExceeded(self.what, self.limit)


def _check_q(pi, D, p, usupp, vs, q) -> bool:
    if not mt_member(pi, q) or not mleq(q, p) or (q.support & usupp):
        return False
    return all(D.member(v.merge(q)) for v in vs)


def _greedy_q(pi, D, p, usupp, vs, budget) -> Optional[Multitree]:
    q = p
    for v in vs:
        budget.tick()
        r = v.merge(q)
        if D.member(r):
            continue
        r2 = D.extend(pi, r)
        if r2 is None or not D.member(r2):
            return None
        if any(not subset(v[xi], r2[xi]) for xi in v.support):
            return None
        q = r2.without(usupp)
    return q


def seal_witness(pi, D, rho, p, ukey, levels, hints=None, budget=None) -> Optional[tuple]:
    """Find (L, q) witnessing the sealing clause for (p, u), or None."""
    budget = budget or _Budget("mseals", DEFAULT_BUDGET)
    usupp = frozenset(xi for xi, _ in ukey)
    hint_qs = list((hints or {}).get((D.id, _pkey(p), ukey), ()))
    if not ukey:
        for q in hint_qs:
            if _check_q(pi, D, p, usupp, [EMPTY], q):
                return (0, q)
        budget.tick()
        q = D.extend(pi, p)
        if q is not None and _check_q(pi, D, p, usupp, [EMPTY], q):
            return (0, q)
        return None
    for L in levels:
        vs = _boxes(rho, ukey, L, pi)
        if vs is None:
            continue
        for q in hint_qs:
            budget.tick()
            if _check_q(pi, D, p, usupp, vs, q):
                return (L, q)
        q = _greedy_q(pi, D, p, usupp, vs, budget)
        if q is not None and _check_q(pi, D, p, usupp, vs, q):
            return (L, q)
    return None


def mseals(pi: Multiforcing, D: DenseSet, rho: Multiforcing, depth: int,
           hints: Optional[dict] = None, levels: Optional[Sequence[int]] = None,
           budget: int = DEFAULT_BUDGET) -> RefinementVerdict:
    """Check that rho seals D over pi, for every generating-family p and
    every u built from generators of rho with support inside |pi| and
    disjoint from |p|.  Each pass records (p, u, L, q)."""
    if levels is None:
        levels = list(range(0, depth + 1))
    levels = list(dict.fromkeys(int(x) for x in levels))
    b = _Budget("mseals", budget)
    fails, wits = [], []
    idx = sorted(pi.support & rho.support)
    for p in family(pi):
        free = [xi for xi in idx if xi not in p.support]
        for ukey in _u_choices(rho, free):
            w = seal_witness(pi, D, rho, p, ukey, levels, hints, b)
            if w is None:
                fails.append(("seal", (p, ukey)))
            else:
                wits.append((p, ukey, w[0], w[1]))
    return RefinementVerdict.of(depth, fails, wits)
