"""Binary strings, clopen perfect trees, the freeze order, fusion and surgery.

Strings are Python ``str`` over ``"0"``/``"1"``; the empty string is the
root.  A :class:`ClopenTree` keeps its branch set as a canonical
prefix-free antichain of stems (the minimal strings whose cones lie in the
set), so equal branch sets give equal objects.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from . import kernels as K
from .errors import (ChainNotDecreasing, DepthExceeded, EmptyInput,
                     InputError, PreconditionError, StringNotInTree, TaskUnmet)

INF = math.inf
ROOT = ""


def check_bits(s: str) -> str:
    if not isinstance(s, str) or s.strip("01"):
        raise InputError(f"not a bit string: {s!r}")
    return s


def str_key(s: str):
    """Length-then-bits order used for every tie-break."""
    return (len(s), s)


def comparable(s: str, t: str) -> bool:
    return s.startswith(t) or t.startswith(s)


class ClopenTree:
    """A perfect tree whose branch set is a finite union of cones."""

    __slots__ = ("stems", "_hash")

    def __init__(self, depth: int, stems: Iterable[str]):
        stems = [check_bits(s) for s in stems]
        if not stems:
            raise EmptyInput("a clopen tree needs at least one stem")
        if any(len(s) > depth for s in stems):
            raise InputError("stem longer than the declared depth")
        self.stems = K.canon(stems)
        self._hash = hash(self.stems)

    @classmethod
    def _raw(cls, stems: tuple) -> "ClopenTree":
        obj = cls.__new__(cls)
        obj.stems = stems
        obj._hash = hash(stems)
        return obj

    @classmethod
    def from_stems(cls, stems: Iterable[str]) -> "ClopenTree":
        stems = [check_bits(s) for s in stems]
        if not stems:
            raise EmptyInput("a clopen tree needs at least one stem")
        return cls._raw(K.canon(stems))

    @property
    def depth(self) -> int:
        return max(len(s) for s in self.stems)

    @property
    def exactness(self):
        return INF

    @property
    def projection(self) -> "ClopenTree":
        return self

    def __contains__(self, t: str) -> bool:
        return K.contains_node(self.stems, t)

    def __eq__(self, other):
        return isinstance(other, ClopenTree) and self.stems == other.stems

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return (self.depth, self.stems) < (other.depth, other.stems)

    def __repr__(self):
        return f"ClopenTree({list(self.stems)!r})"

    def slice(self, m: int) -> list:
        return K.level_nodes(self.stems, m)

    def count(self, m: int) -> int:
        return K.slice_count(self.stems, m)

    def stem(self) -> str:
        """Longest string comparable with every branch."""
        a, b = self.stems[0], self.stems[-1]
        i = 0
        while i < min(len(a), len(b)) and a[i] == b[i]:
            i += 1
        return a[:i]


@dataclass(frozen=True)
class FusionTree:
    """A decreasing chain of clopen trees with increasing freeze levels.

    Membership is exact up to the last freeze level; beyond it the last
    chain element is used as a clopen over-approximation.
    """
    chain: tuple
    log: tuple = ()

    @property
    def projection(self) -> ClopenTree:
        return self.chain[-1][1]

    @property
    def exactness(self) -> int:
        return self.chain[-1][0]

    @property
    def depth(self) -> int:
        return self.projection.depth

    @property
    def stems(self):
        return self.projection.stems

    def __contains__(self, t: str) -> bool:
        if len(t) > self.exactness:
            raise DepthExceeded(len(t), self.exactness)
        return t in self.projection

    def stem(self) -> str:
        return self.projection.stem()


Tree = Union[ClopenTree, FusionTree]


def proj(t: Tree) -> ClopenTree:
    return t.projection


def exactness(t: Tree):
    return t.exactness


FULL = ClopenTree._raw((ROOT,))


def full() -> ClopenTree:
    return FULL


def cone(s: str) -> ClopenTree:
    return ClopenTree._raw((check_bits(s),))


def is_member(t: str, T: Tree) -> bool:
    return t in T


def subset(S: Tree, T: Tree) -> bool:
    return not K.diff(proj(S).stems, proj(T).stems)


def difference(S: Tree, T: Tree) -> Optional[ClopenTree]:
    d = K.diff(proj(S).stems, proj(T).stems)
    return ClopenTree._raw(d) if d else None


def truncate(T: Tree, m: int) -> ClopenTree:
    return ClopenTree._raw(K.truncate(proj(T).stems, m))


def restrict_clopen(T: ClopenTree, s: str) -> ClopenTree:
    stems = T.stems
    sset = set(stems)
    for i in range(len(s) + 1):
        if s[:i] in sset:
            return ClopenTree._raw((s,))
    lo, hi = bisect_left(stems, s), bisect_left(stems, s + "2")
    if lo == hi:
        raise StringNotInTree(f"{s!r} is not in the tree")
    return ClopenTree._raw(stems[lo:hi])


def restrict(T: Tree, s: str) -> Tree:
    """T restricted to the strings comparable with s."""
    check_bits(s)
    if isinstance(T, FusionTree):
        if len(s) > T.exactness:
            raise DepthExceeded(len(s), T.exactness)
        chain = tuple((n, restrict_clopen(X, s)) for n, X in T.chain)
        return FusionTree(chain, tuple(e for e in T.log if comparable(e[0], s)))
    return restrict_clopen(T, s)


def union(ts: Sequence[Tree]) -> ClopenTree:
    ts = list(ts)
    if not ts:
        raise EmptyInput("union of no trees")
    stems = []
    for t in ts:
        stems.extend(proj(t).stems)
    return ClopenTree._raw(K.canon(stems))


def intersect(S: Tree, T: Tree) -> Optional[ClopenTree]:
    """Clopen tree with branch set [S] meet [T], or None when empty."""
    m = K.meet(proj(S).stems, proj(T).stems)
    return ClopenTree._raw(m) if m else None


def _check_projection_exact(*trees):
    for t in trees:
        if isinstance(t, FusionTree) and t.projection.depth > t.exactness:
            raise DepthExceeded(t.projection.depth, t.exactness)


def almost_disjoint(S: Tree, T: Tree) -> bool:
    _check_projection_exact(S, T)
    return K.disjoint(proj(S).stems, proj(T).stems)


def same_slice(S: Tree, T: Tree, m: int) -> bool:
    return K.truncate(proj(S).stems, m) == K.truncate(proj(T).stems, m)


def lec(n: int, T: Tree, m: int, S: Tree) -> bool:
    """Decide <n,T> extends <m,S>: m <= n, T inside S, equal level-m slices."""
    need = max(n, m)
    for x in (T, S):
        if x.exactness < need:
            raise DepthExceeded(need, x.exactness)
    if m > n:
        return False
    return subset(T, S) and same_slice(T, S, m)


def splits_below(T: Tree, t: str, n: int) -> bool:
    """Frozen splitting: t not in T, or some s above t with both children
    in T and lh(s)+1 <= n."""
    P = proj(T)
    if t not in P:
        return True
    if len(t) >= n:
        return False
    return restrict_clopen(P, t).count(n) >= 2


def fuse(chain: Sequence, required_tasks: Sequence[str] = ()) -> FusionTree:
    chain = tuple((int(n), T if isinstance(T, ClopenTree) else proj(T)) for n, T in chain)
    if not chain:
        raise EmptyInput("empty fusion chain")
    for j in range(len(chain) - 1):
        (n0, T0), (n1, T1) = chain[j], chain[j + 1]
        if n1 <= n0:
            raise ChainNotDecreasing(j + 1, "freeze levels not increasing")
        if not lec(n1, T1, n0, T0):
            raise ChainNotDecreasing(j + 1, "not an extension in the freeze order")
    log = []
    for t in required_tasks:
        check_bits(t)
        for j, (n, T) in enumerate(chain):
            if splits_below(T, t, n):
                log.append((t, j))
                break
        else:
            raise TaskUnmet(t)
    return FusionTree(chain, tuple(log))


def splice(S: ClopenTree, u: str, T: ClopenTree, n: int) -> ClopenTree:
    """Replace S above the level-n node u by T (a subtree of S restricted to u)."""
    check_bits(u)
    if u not in S:
        raise StringNotInTree(f"{u!r} is not in S")
    if len(u) != n:
        raise PreconditionError(f"lh(u)={len(u)} differs from n={n}")
    if not subset(T, restrict_clopen(S, u)) or u not in T:
        raise PreconditionError("T is not a subtree of S restricted to u")
    rest = K.diff(S.stems, (u,))
    return ClopenTree._raw(K.canon(rest + T.stems))


def _splitting_pair(A: ClopenTree, B: ClopenTree, n: int):
    """Least incomparable pair (v, w), v in A, w in B, above level n."""
    level = n + 1
    while True:
        va = A.slice(level)
        vb = B.slice(level)
        for v in va:
            for w in vb:
                if v != w:
                    return v, w
        level += 1


def shrink_disjoint(n: int, T: ClopenTree, T2: ClopenTree):
    """Shrink both trees above level n until their bodies are disjoint,
    keeping both level-n slices."""
    S, S2 = proj(T), proj(T2)
    common = K.meet(K.truncate(S.stems, n), K.truncate(S2.stems, n))
    if not common:
        return S, S2
    for u in K.level_nodes(common, n):
        A, B = restrict_clopen(S, u), restrict_clopen(S2, u)
        if K.disjoint(A.stems, B.stems):
            continue
        v, w = _splitting_pair(A, B, n)
        S = splice(S, u, restrict_clopen(A, v), n)
        S2 = splice(S2, u, restrict_clopen(B, w), n)
    return S, S2


def drift(T: ClopenTree, n: int, choose) -> ClopenTree:
    """Keep one child of each level-n node; choose(node, children) picks it."""
    keep = []
    for u in K.level_nodes(T.stems, n):
        kids = [c for c in (u + "0", u + "1") if c in T]
        c = kids[0] if len(kids) == 1 else choose(u, kids)
        keep.extend(restrict_clopen(T, c).stems)
    return ClopenTree._raw(K.canon(keep))
