"""Systems of trees, dense tasks, and the generic refinement engine.

A system maps keys (xi, k) to clopen trees.  The engine walks a fixed
phase order, each phase handing the current pair (n, phi) to the tasks of
one family, and records a step after every phase.  The recorded steps
form the fusion chains of the output trees.
"""
from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from . import kernels as K
from .arboreal import (ArborealForcing, _member_inside_tree, _piece_inside, clopen_in,
                       is_predense_trees, is_special, member_cone, seals)
from .errors import (BudgetRejected, DepthExceeded, PreconditionError, TaskStuck)
from .multi import (DEFAULT_BUDGET, DenseSet, Multiforcing, Multitree, _pkey,
                    family, mrefines, mseals)
from .names import (RealName, avoid_dense, cone_dense, force_decided, force_outside,
                    forced_prefix, is_nonprincipal)
from .trees import (ClopenTree, FusionTree, Tree, cone, drift, fuse, proj,
                    restrict_clopen, shrink_disjoint, splice, splits_below)

Key = Tuple[int, int]

PHASES = ("g", "d", "f", "syn:pre-b", "b", "syn:pre-e", "e", "syn:close", "a", "c")
FAMILIES = ("a", "b", "c", "d", "e", "f", "g")
MAX_TASKS = 10 ** 5


class System:
    """A finite map (xi, k) -> clopen tree."""

    __slots__ = ("items", "_map")

    def __init__(self, assignment: Mapping[Key, Tree] = ()):
        d = dict(assignment)
        self.items = tuple(sorted(((int(a), int(b)), proj(T)) for (a, b), T in d.items()))
        self._map = dict(self.items)

    @property
    def support(self) -> frozenset:
        return frozenset(self._map)

    def keys(self):
        return [k for k, _ in self.items]

    def __getitem__(self, key) -> ClopenTree:
        return self._map[key]

    def get(self, key, default=None):
        return self._map.get(key, default)

    def __contains__(self, key):
        return key in self._map

    def as_dict(self) -> dict:
        return dict(self._map)

    def indices(self) -> list:
        return sorted({xi for xi, _ in self._map})

    def __eq__(self, other):
        return isinstance(other, System) and \
            [(k, T.stems) for k, T in self.items] == [(k, T.stems) for k, T in other.items]

    def __hash__(self):
        return hash(tuple((k, T.stems) for k, T in self.items))

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return f"System({ {k: list(T.stems) for k, T in self.items} })"


def sys_lec(n: int, phi: System, m: int, psi: System) -> bool:
    """<n, phi> extends <m, psi>: m <= n, keys kept, trees shrink, level-m
    slices kept."""
    if m > n or not psi.support <= phi.support:
        return False
    for key, S in psi.items:
        T = phi[key]
        if K.diff(T.stems, S.stems) or K.truncate(T.stems, m) != K.truncate(S.stems, m):
            return False
    return True


@dataclass
class DenseTask:
    """An open dense task: member(n, phi) -> bool, extend(m, psi) ->
    (n, phi) or (n, phi, notes)."""
    id: str
    family: str
    member: Callable
    extend: Callable
    phase: str = ""
    ctx: object = field(default=None, repr=False)

    def __post_init__(self):
        if not self.phase:
            self.phase = self.family


@dataclass
class RefinementTrace:
    steps: list
    schedule: list
    j_of: dict
    seal_levels: list
    witnesses: dict
    config: dict

    @property
    def final(self) -> System:
        return self.steps[-1][1]

    @property
    def n_final(self) -> int:
        return self.steps[-1][0]


class _Ctx:
    """State shared by the tasks of one mandatory_tasks call."""

    def __init__(self, pi: Multiforcing, k_max: int, depth: int):
        self.pi = pi
        self.k_max = k_max
        self.depth = depth
        self.seed = 0
        self.U = {xi: P.union for xi, P in pi.items}
        self.base = dict(self.U)
        fat = [proj(g).depth for _, P in pi.items for g in P.generators
               if isinstance(g, ClopenTree)]
        self.g_fat = max(fat, default=0)
        self.g_all = max((P.max_depth for _, P in pi.items), default=0)

    def choose(self, node, kids):
        h = hashlib.blake2b(f"{self.seed}|{node}".encode(), digest_size=2).digest()
        return kids[h[0] & 1]

    def drift_all(self, n: int, phi: dict) -> dict:
        return {key: drift(T, n, self.choose) for key, T in phi.items()}

    @property
    def depth_target(self) -> int:
        return max(self.depth, self.g_all)


# individual task families

def _grow_task(ctx, xi, k):
    key = (xi, k)

    def member(n, phi):
        return key in phi

    def extend(m, psi):
        d = psi.as_dict()
        d[key] = ctx.base[xi]
        return m, System(d)
    return DenseTask(f"g:{xi}:{k}", "g", member, extend, ctx=ctx)


def _density_task(ctx, xi, G, tag):
    G = proj(G)
    keys = [(xi, k) for k in range(ctx.k_max)]

    def member(n, phi):
        for key in keys:
            T = phi.get(key)
            if T is None:
                continue
            d = K.diff(T.stems, G.stems)
            if not d or T.count(n) > K.slice_count(d, n):
                return True
        return False

    def extend(m, psi):
        n = max(m, ctx.g_fat)
        if member(n, psi):
            return n, psi
        for key in keys:
            T = psi.get(key)
            if T is None:
                continue
            for s in T.slice(n):
                X = K.meet(restrict_clopen(T, s).stems, G.stems)
                if X:
                    d = psi.as_dict()
                    d[key] = splice(T, s, ClopenTree._raw(X), n)
                    return n, System(d)
        return None
    return DenseTask(f"d:{xi}:{tag}", "d", member, extend, ctx=ctx)


def _pair_task(ctx, a, b):
    def member(n, phi):
        return K.disjoint(phi[a].stems, phi[b].stems)

    def extend(m, psi):
        A, B = shrink_disjoint(m, psi[a], psi[b])
        d = psi.as_dict()
        d[a], d[b] = A, B
        return m, System(d)
    return DenseTask(f"b:{a[0]}.{a[1]}:{b[0]}.{b[1]}", "b", member, extend, ctx=ctx)


def _syn_task(ctx, phase, close=False):
    def member(n, phi):
        if close and n < ctx.depth_target:
            return False
        return all(T.depth <= n for _, T in phi.items)

    def extend(m, psi):
        n, d = m, psi.as_dict()
        while (close and n < ctx.depth_target) or any(T.depth > n for T in d.values()):
            d = ctx.drift_all(n, d)
            n += 1
        return n, System(d)
    return DenseTask(phase, "syn", member, extend, phase=phase, ctx=ctx)


def _split_task(ctx, t):
    def member(n, phi):
        return all(splits_below(T, t, n) for _, T in phi.items)

    def extend(m, psi):
        n = m
        for _, T in psi.items:
            if t not in T:
                continue
            R = restrict_clopen(T, t)
            L = len(t) + 1
            while R.count(L) < 2:
                if L > R.depth:
                    return None
                L += 1
            n = max(n, L)
        return n, psi
    return DenseTask(f"a:{t}", "a", member, extend, ctx=ctx)


def _clopen_task(ctx, xi, G, tag):
    need = proj(G).depth

    def member(n, phi):
        return n >= need

    def extend(m, psi):
        return max(m, need), psi
    return DenseTask(f"c:{xi}:{tag}", "c", member, extend, ctx=ctx)


def _noninclusion_task(ctx, xi, G, tag):
    G = proj(G)
    keys = [(xi, k) for k in range(ctx.k_max)]
    d0 = ctx.depth

    def member(n, phi):
        if n < d0:
            return False
        tops = set(G.slice(d0))
        for key in keys:
            T = phi.get(key)
            if T is None:
                continue
            out = K.diff(K.truncate(G.stems, n), K.truncate(T.stems, n))
            escaped = set(K.level_nodes(K.truncate(out, d0), d0)) if out else set()
            if not tops <= escaped:
                return False
        return True

    def extend(m, psi):
        n, d = m, psi.as_dict()
        for _ in range(64):
            if member(n, System(d)):
                return n, System(d)
            d = ctx.drift_all(n, d)
            n += 1
        return None
    return DenseTask(f"c':{xi}:{tag}", "c", member, extend, ctx=ctx)


# sealing (families e and f)

def _level_cone(T: ClopenTree, s: str) -> ClopenTree:
    return cone(restrict_clopen(T, s).stem())


def _shrink_pieces(ctx, d, n, ukey, box, r2):
    """Shrink the u-pieces at box so that their cones lie inside r2."""
    for (xi, k), s in zip(ukey, box):
        T = d[(xi, k)]
        piece = restrict_clopen(T, s)
        target = proj(r2[xi])
        if not K.diff((piece.stem(),), target.stems):
            continue
        X = K.meet(piece.stems, target.stems)
        if not X:
            return False
        a = min(X, key=lambda w: (len(w), w))
        d[(xi, k)] = splice(T, s, ClopenTree._raw((a,)), n)
    return True


def _seal_system(ctx, n, d, D_id, member_fn, extend_fn, on_fail=None):
    """Seal one dense set into the system d (mutated).  Returns witnesses."""
    pi = ctx.pi
    idx = sorted(pi.support)
    wit = {}
    for p in family(pi):
        free = [xi for xi in idx if xi not in p.support]
        opts = [[None] + list(range(ctx.k_max)) for _ in free]
        for combo in product(*opts):
            ukey = tuple((xi, k) for xi, k in zip(free, combo) if k is not None)
            usupp = frozenset(xi for xi, _ in ukey)
            q = p
            boxes = product(*[d[key].slice(n) for key in ukey]) if ukey else [()]
            for box in boxes:
                v = Multitree({xi: _level_cone(d[(xi, k)], s)
                               for (xi, k), s in zip(ukey, box)})
                for xi, T in v.items:
                    if member_cone(pi[xi], T.stems[0]) is None:
                        raise TaskStuck(D_id)
                r = v.merge(q)
                if member_fn(d, r):
                    continue
                r2 = extend_fn(d, r)
                if r2 is None and on_fail is not None:
                    r2 = on_fail(d, r)
                if r2 is None or not _shrink_pieces(ctx, d, n, ukey, box, r2):
                    raise TaskStuck(D_id)
                q = r2.without(usupp)
            wit[(D_id, _pkey(p), ukey)] = q
    return wit


def _seal_task(ctx, D: DenseSet):
    def member(n, phi):
        return False

    def extend(m, psi):
        m = max(m, ctx.g_fat)
        d = psi.as_dict()
        wit = _seal_system(ctx, m, d, D.id,
                           lambda _d, r: D.member(r),
                           lambda _d, r: D.extend(ctx.pi, r))
        return m, System(d), {"witnesses": wit, "level": m}
    return DenseTask(f"e:{D.id}", "e", member, extend, ctx=ctx)


def _avoid_task(ctx, c: RealName, xi: int, k: int):
    key = (xi, k)
    D_id = avoid_id(c, xi, k)

    def member(n, phi):
        return False

    def member_fn(d, r):
        return xi in r.support and forced_prefix(r, c) not in d[key]

    def extend_fn(d, r):
        return force_outside(ctx.pi, c, r, d[key], xi=xi)

    def extend(m, psi):
        m = max(m, ctx.g_fat)
        if c.horizon <= m:
            return None
        d = psi.as_dict()

        def on_fail(d, r):
            r2 = force_decided(ctx.pi, c, r, d[key], xi=xi)
            fp = forced_prefix(r2, c)
            if fp not in d[key]:
                return r2
            if len(fp) <= m:
                return None
            w = fp[:m]
            T = d[key]
            piece = restrict_clopen(T, w)
            rest = K.diff(piece.stems, (fp,))
            if not rest:
                return None
            d[key] = splice(T, w, ClopenTree._raw(rest), m)
            return r2
        wit = _seal_system(ctx, m, d, D_id, member_fn, extend_fn, on_fail)
        return m, System(d), {"witnesses": wit, "level": m}
    return DenseTask(f"f:{c.id}:{xi}:{k}", "f", member, extend, ctx=ctx)


def _tree_seal_task(ctx, xi, D, id):
    """Every level-n piece of every (xi, k) tree ends up inside a tree of D."""
    Ds = [proj(S) for S in D]

    def member(n, phi):
        for k in range(ctx.k_max):
            T = phi.get((xi, k))
            if T is None:
                return False
            for s in T.slice(n):
                piece = restrict_clopen(T, s)
                if not any(not K.diff(piece.stems, S.stems) for S in Ds):
                    return False
        return True

    def extend(m, psi):
        d = psi.as_dict()
        for k in range(ctx.k_max):
            T = d.get((xi, k))
            if T is None:
                continue
            for s in T.slice(m):
                piece = restrict_clopen(d[(xi, k)], s)
                if any(not K.diff(piece.stems, S.stems) for S in Ds):
                    continue
                for S in Ds:
                    X = K.meet(piece.stems, S.stems)
                    if X:
                        d[(xi, k)] = splice(d[(xi, k)], s, ClopenTree._raw(X), m)
                        break
                else:
                    return None
        return m, System(d)
    return DenseTask(f"e:{id}", "e", member, extend, ctx=ctx)


def avoid_id(c: RealName, xi: int, k: int) -> str:
    return f"avoid:{c.id}:{xi}:{k}"


def mandatory_tasks(pi: Multiforcing, name_pool: Sequence[RealName] = (),
                    dense_pool: Sequence[DenseSet] = (), depth: int = 4, k_max: int = 4,
                    avoid_pool: Sequence[Tuple[RealName, int]] = (),
                    tree_pool: Sequence[Tuple[int, Sequence[Tree]]] = (),
                    chain: Sequence[Multiforcing] = (),
                    max_tasks: int = MAX_TASKS) -> List[DenseTask]:
    """The task list for one refinement run: support growth (g), density
    (d), avoidance (f), pairwise disjointness (b), sealing of dense sets and
    name cone sets (e), frozen splitting (a) and relative clopenness with
    non-inclusion (c), plus the internal normalization passes.

    tree_pool holds (xi, trees) pairs pre-dense in pi(xi).  Each chain term
    contributes its generator sets as such pairs, and its generators get
    density and clopenness tasks, so that every term is refined by the
    output as well."""
    if depth < 0 or k_max < 1:
        raise PreconditionError("depth must be >= 0 and k_max >= 1")
    idx = sorted(pi.support)
    ngens = sum(len(pi[xi].generators) for xi in idx)
    nkeys = len(idx) * k_max
    estimate = (nkeys + ngens + len(avoid_pool) * k_max + nkeys * (nkeys - 1) // 2
                + len(dense_pool) + sum(c.horizon for c in name_pool)
                + len(tree_pool) + sum(len(P) for P in chain)
                + (2 ** (depth + 1) - 1) + 2 * ngens)
    if estimate > max_tasks:
        raise BudgetRejected(f"{estimate} tasks exceed the budget of {max_tasks}")
    ctx = _Ctx(pi, k_max, depth)
    tasks = []
    keys = [(xi, k) for xi in idx for k in range(k_max)]
    tasks += [_grow_task(ctx, xi, k) for xi, k in keys]
    # generators of pi, then those of chain terms not already in pi
    old = [(xi, G, str(gi)) for xi in idx for gi, G in enumerate(pi[xi].generators)]
    for a, P in enumerate(chain):
        old += [(xi, G, f"{a}.{gi}") for xi, R in P.items if xi in pi
                for gi, G in enumerate(R.generators) if G not in pi[xi].generators]
    tasks += [_density_task(ctx, xi, G, tag) for xi, G, tag in old]
    for c, xi in avoid_pool:
        tasks += [_avoid_task(ctx, c, xi, k) for k in range(k_max)]
    tasks.append(_syn_task(ctx, "syn:pre-b"))
    tasks += [_pair_task(ctx, a, b) for a, b in combinations(keys, 2)]
    tasks.append(_syn_task(ctx, "syn:pre-e"))
    trees = [(xi, list(D), f"trees:{xi}:{j}") for j, (xi, D) in enumerate(tree_pool)]
    for a, P in enumerate(chain):
        trees += [(xi, list(R.generators), f"chain:{a}:{xi}") for xi, R in P.items if xi in pi]
    for xi, D, _ in trees:
        X = K.meet(ctx.base[xi].stems, K.canon([s for S in D for s in proj(S).stems]))
        if X:
            ctx.base[xi] = ClopenTree._raw(X)
    tasks += [_tree_seal_task(ctx, xi, D, tid) for xi, D, tid in trees]
    tasks += [_seal_task(ctx, D) for D in dense_pool]
    for c in name_pool:
        tasks += [_seal_task(ctx, cone_dense(c, n)) for n in range(c.horizon)]
    tasks.append(_syn_task(ctx, "syn:close", close=True))
    nodes = [""]
    for _ in range(depth + 1):
        tasks += [_split_task(ctx, t) for t in nodes]
        nodes = [t + b for t in nodes for b in "01"]
    for xi, G, tag in old:
        tasks.append(_clopen_task(ctx, xi, G, tag))
        tasks.append(_noninclusion_task(ctx, xi, G, tag))
    return tasks


def generic_refine(pi: Multiforcing, tasks: Sequence[DenseTask], seed: int = 0,
                   depth: Optional[int] = None, ablate: Sequence[str] = (),
                   check: bool = False):
    """Run the tasks phase by phase; returns (rho, trace).

    The run is a function of (pi, tasks, seed).  Families listed in ablate
    are skipped.  With check=True every extension is verified to be an
    extension and, where cheap, to meet its task.
    """
    ablate = set(ablate)
    for t in tasks:
        if t.ctx is not None:
            t.ctx.seed = seed
    ctxs = [t.ctx for t in tasks if t.ctx is not None]
    if depth is None:
        depth = ctxs[0].depth if ctxs else 0
    by_phase: Dict[str, list] = {}
    for t in tasks:
        if t.family in ablate:
            continue
        by_phase.setdefault(t.phase, []).append(t)
    rng = random.Random(seed)
    n, phi = 0, System()
    steps, schedule, witnesses, levels = [], [], {}, []
    for phase in PHASES:
        group = by_phase.get(phase, [])
        if phase in ("b", "a"):
            rng.shuffle(group)
        if not group:
            continue
        met = []
        for t in group:
            if t.family not in ("e", "f") and t.member(n, phi):
                met.append(t.id)
                continue
            res = t.extend(n, phi)
            if res is None:
                raise TaskStuck(t.id)
            n2, phi2 = res[0], res[1]
            if len(res) > 2:
                notes = res[2]
                for k, q in notes.get("witnesses", {}).items():
                    witnesses.setdefault(k, []).append(q)
                levels.append(notes["level"])
            if check:
                if not sys_lec(n2, phi2, n, phi):
                    raise TaskStuck(t.id)
                if t.family not in ("e", "f") and not t.member(n2, phi2):
                    raise TaskStuck(t.id)
            n, phi = n2, phi2
            met.append(t.id)
        n_rec = n if not steps else max(n, steps[-1][0] + 1)
        if steps and steps[-1][1] == phi and steps[-1][0] == n:
            schedule.extend((tid, len(steps) - 1) for tid in met)
            continue
        steps.append((n_rec, phi))
        n = n_rec
        schedule.extend((tid, len(steps) - 1) for tid in met)
    if not steps:
        steps.append((0, System()))
    trace = _make_trace(pi, steps, schedule, witnesses, levels,
                        {"seed": seed, "depth": depth, "ablate": sorted(ablate),
                         "k_max": ctxs[0].k_max if ctxs else 0})
    return build_rho(trace), trace


def _make_trace(pi, steps, schedule, witnesses, levels, config):
    j_of = {}
    for j, (_, phi) in enumerate(steps):
        for key in phi.keys():
            j_of.setdefault(key, j)
    return RefinementTrace(steps, schedule, j_of, sorted(set(levels)), witnesses, config)


def build_rho(trace: RefinementTrace) -> Multiforcing:
    """Fuse the recorded chains into the output multiforcing."""
    final = trace.final
    split_at = {}
    for tid, j in trace.schedule:
        if tid.startswith("a:"):
            split_at[tid[2:]] = j
    out: Dict[int, list] = {}
    for key in final.keys():
        j0 = trace.j_of[key]
        chain = [(n, phi[key]) for n, phi in trace.steps[j0:] if key in phi]
        F = fuse(chain)
        log = tuple(sorted((t, max(j - j0, 0)) for t, j in split_at.items()))
        out.setdefault(key[0], []).append(FusionTree(F.chain, log))
    return Multiforcing({xi: ArborealForcing(gs) for xi, gs in out.items()})


# verification

@dataclass
class Report:
    clauses: dict
    depth: int

    @property
    def holds(self) -> bool:
        return all(v["holds"] for v in self.clauses.values())

    def __bool__(self):
        return self.holds

    def failed(self) -> list:
        return sorted(k for k, v in self.clauses.items() if not v["holds"])


def _clause(fails) -> dict:
    fails = list(fails)
    return {"holds": not fails, "failures": fails[:20]}


def _perfect_to(G: Tree, depth: int) -> bool:
    """Every node of length <= depth splits below the exactness level."""
    P = proj(G)
    if isinstance(G, ClopenTree):
        # exact everywhere; any level past the stems will do
        e = max(P.depth, depth) + 1
    else:
        e = int(G.exactness)
    if e <= depth:
        return False
    tops = P.slice(depth)
    counts = Counter(s[:depth] for s in P.slice(e))
    return all(counts[t] >= 2 for t in tops)


def verify_dj(pi: Multiforcing, rho: Multiforcing, trace: Optional[RefinementTrace],
              depth: int, tree_dense: Sequence = (), chain: Sequence[Multiforcing] = ()) -> Report:
    """Check the six clauses of a good refinement of pi by rho up to depth."""
    cl = {}
    f1 = []
    if rho.support != pi.support:
        f1.append(("support", sorted(pi.support ^ rho.support)))
    for xi, R in rho.items:
        if is_special(R) is None:
            f1.append(("special", xi))
        for j, G in enumerate(R.generators):
            if not _perfect_to(G, depth):
                f1.append(("perfect", (xi, j)))
    try:
        v = mrefines(pi, rho, depth)
        f1 += [("refines", x) for x in v.failures]
    except DepthExceeded as e:
        f1.append(("refines", str(e)))
    if trace is not None:
        for j in range(1, len(trace.steps)):
            (n0, s0), (n1, s1) = trace.steps[j - 1], trace.steps[j]
            if n1 <= n0 or not sys_lec(n1, s1, n0, s0):
                f1.append(("chain", j))
    cl["i"] = _clause(f1)

    f2 = []
    trees = [((xi, j), proj(G)) for xi, R in rho.items for j, G in enumerate(R.generators)]
    if trace is not None:
        final = trace.final
        for (a, A), (b, B) in combinations(final.items, 2):
            if A == B:
                f2.append(("identical", (a, b)))
    for (a, A), (b, B) in combinations(trees, 2):
        if not K.disjoint(A.stems, B.stems):
            f2.append(("overlap", (a, b)))
    if trace is not None:
        # identical keyed trees collapse into one generator
        for xi, R in rho.items:
            want = sum(1 for (x, _) in final.keys() if x == xi)
            if len(R.generators) != want:
                f2.append(("count", xi))
    cl["ii"] = _clause(f2)

    f3, f4 = [], []
    for xi, P in pi.items:
        if xi not in rho:
            continue
        Qs = rho[xi].generators
        for i, T in enumerate(P.generators):
            if not any(_piece_inside(S, T) is not None for S in Qs):
                f4.append(("dense", (xi, i)))
            for j, S in enumerate(Qs):
                L = max(proj(T).depth, depth)
                if not clopen_in(S, T, L):
                    f3.append(("clopen", (xi, j, i)))
                t = _member_inside_tree(T, S, depth)
                if t is not None:
                    f3.append(("inside", (xi, j, i, t)))
                    f4.append(("open", (xi, j, i, t)))
    cl["iii"] = _clause(f3)
    cl["iv"] = _clause(f4)

    f5 = []
    for xi, D in tree_dense:
        if xi in pi and xi in rho and is_predense_trees(D, pi[xi]):
            if not seals(pi[xi], D, rho[xi], depth).holds:
                f5.append(("seal", xi))
    cl["v"] = _clause(f5)

    f6 = []
    for a, P in enumerate(chain):
        v = mrefines(P, rho, depth)
        if not v.holds:
            f6.append(("chain", a, v.failures[:3]))
    cl["vi"] = _clause(f6)
    return Report(cl, depth)


def _levels(trace, depth):
    lv = list(trace.seal_levels) if trace is not None else []
    return lv + [L for L in range(depth + 1) if L not in lv]


def verify_uu4(pi: Multiforcing, D: DenseSet, rho: Multiforcing, depth: int,
               trace: Optional[RefinementTrace] = None, budget: int = DEFAULT_BUDGET):
    """Sealing of a pre-dense D, using the trace's witnesses as hints."""
    hints = trace.witnesses if trace is not None else None
    return mseals(pi, D, rho, depth, hints, _levels(trace, depth), budget)


def verify_avoidance(pi: Multiforcing, c: RealName, xi: int, rho: Multiforcing, depth: int,
                     trace: Optional[RefinementTrace] = None, budget: int = DEFAULT_BUDGET):
    """For each generator Q of rho(xi): the set of conditions forcing c out
    of [Q] is sealed.  Refuses names that are principal at xi."""
    if not is_nonprincipal(c, pi, xi):
        raise PreconditionError(f"name {c.id} is not non-principal at {xi}")
    hints = trace.witnesses if trace is not None else None
    from .arboreal import RefinementVerdict
    fails, wits = [], []
    for k, Q in enumerate(rho[xi].generators):
        D = avoid_dense(c, xi, Q, id=avoid_id(c, xi, k))
        v = mseals(pi, D, rho, depth, hints, _levels(trace, depth), budget)
        fails += [(k, f) for f in v.failures]
        wits += list(v.witnesses)
    return RefinementVerdict.of(depth, fails, wits)
