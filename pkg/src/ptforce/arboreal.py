"""Arboreal forcings stored by generators, and the refinement checkers.

A forcing is a finite generator list; its members are the restrictions
G|t of generators.  Checks that quantify over members reduce to checks on
generator pairs wherever the quantified property is monotone in t.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import kernels as K
from .errors import DepthExceeded, EmptyInput, PreconditionError, RegularityViolated
from .trees import (ClopenTree, FusionTree, Tree, almost_disjoint, cone, drift, full,
                    intersect, proj, restrict, restrict_clopen, str_key, subset)


class ArborealForcing:
    __slots__ = ("generators", "_union", "_key")

    def __init__(self, generators: Iterable[Tree]):
        gens = []
        seen = set()
        for g in generators:
            k = _tree_key(g)
            if k not in seen:
                seen.add(k)
                gens.append(g)
        if not gens:
            raise EmptyInput("a forcing needs at least one generator")
        self.generators = tuple(gens)
        self._union = None
        self._key = tuple(_tree_key(g) for g in gens)

    @property
    def union(self) -> ClopenTree:
        """The clopen set covered by all members."""
        if self._union is None:
            stems = []
            for g in self.generators:
                stems.extend(proj(g).stems)
            self._union = ClopenTree._raw(K.canon(stems))
        return self._union

    @property
    def max_depth(self) -> int:
        return max(proj(g).depth for g in self.generators)

    @property
    def exactness(self):
        return min(g.exactness for g in self.generators)

    def __eq__(self, other):
        return isinstance(other, ArborealForcing) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"ArborealForcing({list(self.generators)!r})"


def _tree_key(t: Tree):
    if isinstance(t, FusionTree):
        return ("fusion", tuple((n, T.stems) for n, T in t.chain))
    return ("clopen", t.stems)


def cohen(bound: int = 3) -> ArborealForcing:
    """Cones T[s] with lh(s) <= bound (restrictions cover the rest)."""
    gens = [full()]
    level = [""]
    for _ in range(bound):
        level = [s + b for s in level for b in "01"]
        gens.extend(cone(s) for s in level)
    return ArborealForcing(gens)


def is_member(P: ArborealForcing, T: Tree) -> bool:
    """T equals G|t for some generator G and string t."""
    X = proj(T)
    t = X.stem()
    for g in P.generators:
        G = proj(g)
        if t in G and restrict_clopen(G, t) == X:
            return True
    return False


def members_upto(P: ArborealForcing, d: int) -> list:
    out, seen = [], set()
    for g in P.generators:
        G = proj(g)
        for m in range(d + 1):
            for t in G.slice(m):
                X = restrict_clopen(G, t)
                if X not in seen:
                    seen.add(X)
                    out.append(X)
    return out


def member_cone(P: ArborealForcing, t: str) -> Optional[ClopenTree]:
    """cone(t) if it is a member, i.e. [t] lies inside one generator."""
    for g in P.generators:
        if K.meet((t,), proj(g).stems) == (t,):
            return cone(t)
    return None


def member_inside(P: ArborealForcing, X: Tree) -> Optional[ClopenTree]:
    """Least cone member inside [X], or None if [X] misses every member."""
    Y = K.meet(proj(X).stems, P.union.stems)
    if not Y:
        return None
    a = min(Y, key=str_key)
    for g in P.generators:
        G = proj(g)
        if a in G:
            sub = restrict_clopen(G, a)
            return cone(min(sub.stems, key=str_key))
    raise AssertionError("union and generators disagree")


def clg_member(P: ArborealForcing, T: Tree) -> bool:
    """[T] is a finite union of members; for clopen generators this is [T]
    inside the union of the generators."""
    X = proj(T)
    if isinstance(T, FusionTree) or any(isinstance(g, FusionTree) for g in P.generators):
        need = X.depth
        if P.exactness < need:
            raise DepthExceeded(need, P.exactness)
    return not K.diff(X.stems, P.union.stems)


def clopen_in(S: Tree, T: Tree, L: int) -> bool:
    """[S] meet [T] is cut out of [S] by the level-L slice of the meet."""
    if S.exactness < L:
        raise DepthExceeded(L, S.exactness)
    X = K.meet(proj(S).stems, proj(T).stems)
    if not X:
        return True
    return K.meet(proj(S).stems, K.truncate(X, L)) == X


def is_regular(P: ArborealForcing, depth: Optional[int] = None) -> bool:
    if depth is not None and P.exactness < depth:
        raise DepthExceeded(depth, P.exactness)
    gens = P.generators
    for i, S in enumerate(gens):
        for T in gens[i + 1:]:
            if almost_disjoint(S, T):
                continue
            L = max(proj(S).depth, proj(T).depth, depth or 0)
            ok = False
            for A, B in ((S, T), (T, S)):
                try:
                    if clopen_in(A, B, L):
                        ok = True
                        break
                except DepthExceeded:
                    continue
            if not ok:
                return False
    return True


def is_special(P: ArborealForcing) -> Optional[tuple]:
    """The antichain generating P, when there is one."""
    gens = [proj(g) for g in P.generators]
    maximal = [G for G in gens
               if not any(H != G and subset(G, H) for H in gens)]
    for i, A in enumerate(maximal):
        for B in maximal[i + 1:]:
            if not almost_disjoint(A, B):
                return None
    for G in gens:
        t = G.stem()
        if not any(t in A and restrict_clopen(A, t) == G for A in maximal):
            return None
    return tuple(maximal)


@dataclass(frozen=True)
class RefinementVerdict:
    holds: bool
    depth: int
    failures: tuple = field(default_factory=tuple)
    witnesses: tuple = field(default_factory=tuple, compare=False)

    def __bool__(self):
        return self.holds

    @staticmethod
    def of(depth, failures, witnesses=()) -> "RefinementVerdict":
        failures = tuple(failures)
        return RefinementVerdict(not failures, depth, failures, tuple(witnesses))


def sqf_cover(T: Tree, D: Sequence[Tree]) -> Optional[tuple]:
    """A finite subfamily of D covering [T], greedy in canonical order and
    then pruned to be minimal; None if D does not cover."""
    remaining = proj(T).stems
    order = sorted(D, key=lambda x: (proj(x).depth, proj(x).stems))
    chosen = []
    for S in order:
        if not remaining:
            break
        if K.meet(remaining, proj(S).stems):
            chosen.append(S)
            remaining = K.diff(remaining, proj(S).stems)
    if remaining:
        return None
    for S in list(chosen):
        rest = [x for x in chosen if x is not S]
        if rest and _covers(T, rest):
            chosen = rest
    return tuple(chosen)


def _covers(T: Tree, D) -> bool:
    stems = []
    for S in D:
        stems.extend(proj(S).stems)
    return not K.diff(proj(T).stems, K.canon(stems))


def _piece_inside(Q: Tree, T: Tree) -> Optional[str]:
    """A node u of Q with [Q|u] inside [T], or None."""
    Qs = proj(Q)
    d = K.diff(Qs.stems, proj(T).stems)
    if not d:
        return ""
    L = max(Qs.depth, proj(T).depth)
    if Q.exactness < L:
        L = int(Q.exactness)
    if K.slice_count(Qs.stems, L) == K.slice_count(d, L):
        return None
    bad = set(K.level_nodes(K.truncate(d, L), L))
    for u in Qs.slice(L):
        if u not in bad:
            return u
    return None


def _member_inside_tree(G: Tree, Q: Tree, d: int) -> Optional[str]:
    """A node t of G with lh(t) = d and [G|t] inside [Q], or None."""
    Gs = proj(G)
    diff = K.diff(Gs.stems, proj(Q).stems)
    if not diff:
        return min(Gs.slice(d))
    if K.slice_count(Gs.stems, d) == K.slice_count(diff, d):
        return None
    bad = set(K.level_nodes(K.truncate(diff, d), d))
    for t in Gs.slice(d):
        if t not in bad:
            return t
    return None


def refines(P: ArborealForcing, Q: ArborealForcing, depth: int) -> RefinementVerdict:
    """Check P refined by Q: density (fm1), finite covers (fm3), relative
    clopenness and non-inclusion (fm4) for members up to depth."""
    fails = []
    for T in P.generators:
        if not any(_piece_inside(S, T) is not None for S in Q.generators):
            fails.append(("fm1", proj(T)))
    for j, S in enumerate(Q.generators):
        if sqf_cover(S, P.generators) is None:
            fails.append(("fm3", j))
    for j, S in enumerate(Q.generators):
        for i, G in enumerate(P.generators):
            L = max(proj(G).depth, depth)
            if not clopen_in(S, G, L):
                fails.append(("fm4", (j, i, "clopen")))
            t = _member_inside_tree(G, S, depth)
            if t is not None:
                fails.append(("fm4", (j, i, t)))
    return RefinementVerdict.of(depth, fails)


def seals(P: ArborealForcing, D, Q: ArborealForcing, depth: int) -> RefinementVerdict:
    """P refined by Q with every generator of Q finitely covered by D."""
    if isinstance(D, ArborealForcing):
        D = D.generators
    D = list(D)
    base = refines(P, Q, depth)
    fails = list(base.failures)
    for j, S in enumerate(Q.generators):
        if sqf_cover(S, D) is None:
            fails.append(("seal", j))
    return RefinementVerdict.of(depth, fails)


def compat_witness(P: ArborealForcing, S: Tree, T: Tree) -> Optional[ClopenTree]:
    if almost_disjoint(S, T):
        return None
    X = intersect(S, T)
    if not clg_member(P, X):
        raise RegularityViolated(f"meet {X!r} is not a finite union of members")
    return X


def is_predense_trees(D: Sequence[Tree], P: ArborealForcing) -> bool:
    """For clopen members, pre-density is covering the union of P."""
    return _covers(P.union, D)


def restrict_member(P: ArborealForcing, i: int, t: str) -> Tree:
    return restrict(P.generators[i], t)


def normalize(P: ArborealForcing, T: Tree, n: int, choose=None) -> ClopenTree:
    """A tree S with <n,S> extending <n,T> whose level-n restrictions are
    members of P (T must lie in clg(P))."""
    if not clg_member(P, T):
        raise PreconditionError("tree is not a finite union of members")
    X = proj(T)
    need = max(X.depth, P.max_depth)
    pick = choose or (lambda node, kids: kids[0])
    m = n
    while m < need:
        X = drift(X, m, pick)
        m += 1
    return X
