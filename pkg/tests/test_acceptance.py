"""Acceptance suite: twelve criteria, each with its own time limit.

Every test records one PASS/FAIL line that is printed in the terminal
summary (see conftest.py).
"""
import random
import time

import pytest
from click.testing import CliRunner

import oracle
from conftest import ACCEPTANCE
from gen import random_chain, random_clg, random_involution
from ptforce.arboreal import (clg_member, compat_witness, is_member,
                              is_regular, normalize)
from ptforce.cli import cli
from ptforce.extlab import (FiniteFilter, MfSequence, build_filter, check_xik3,
                            defined_prefix, eval_name, extract_real, perm_apply,
                            real_outside_layer, step_extend)
from ptforce.multi import (Multitree, cone_or_incompatible, cw_union, is_predense, mleq,
                           mrefines, mt_member, sad)
from ptforce.names import (avoid_dense, cone_dense, is_complete, is_nonprincipal,
                           is_real_name, name_sealed, principal_name)
from ptforce.randgen import (random_clopen, random_dense, random_forcing, random_multiforcing,
                             random_multitree, random_name)
from ptforce.refine import (avoid_id, generic_refine, mandatory_tasks, verify_avoidance,
                            verify_dj, verify_uu4)
from ptforce.serialize import dumps, loads
from ptforce.trees import (almost_disjoint, fuse, lec, proj, restrict, restrict_clopen,
                           shrink_disjoint, splice)


class Crit:
    """Times a criterion and records its summary line."""

    def __init__(self, n, limit):
        self.n, self.limit = n, limit
        self.fails = []
        self.note = ""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, et, ev, tb):
        dt = time.perf_counter() - self.t0
        ok = et is None and not self.fails and dt < self.limit
        detail = f"{dt:.2f}s (limit {self.limit}s), {len(self.fails)} failures {self.note}"
        if et is not None:
            detail += f" raised {et.__name__}: {ev}"
        ACCEPTANCE.append((self.n, ok, detail.strip()))
        print(f"criterion {self.n}: {'PASS' if ok else 'FAIL'} {detail}")
        if et is None:
            assert not self.fails, self.fails[:5]
            assert dt < self.limit, f"took {dt:.1f}s"
        return False


def _rho_run(s):
    r = random.Random(s)
    pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
    return r, pi


def test_crit_01_fusion_soundness():
    with Crit(1, 10) as c:
        for s in range(500):
            r = random.Random(s)
            chain = random_chain(r, length=r.randint(2, 5))
            n0 = chain[0][0]
            tasks = [t for L in range(n0 + 1) for t in oracle.strings(L)]
            F = fuse(chain, tasks)
            L = chain[-1][0]
            for n, T in chain:
                if not lec(n, F, n, T):
                    c.fails.append((s, n, "lec"))
                if not oracle.lec(n, F.projection.stems, n, T.stems, L):
                    c.fails.append((s, n, "oracle"))
            if {t for t, _ in F.log} != set(tasks):
                c.fails.append((s, "log"))


def test_crit_02_regular_compatibility():
    with Crit(2, 30) as c:
        pairs = 0
        for s in range(500):
            r = random.Random(s)
            P = random_forcing(r, max_gens=6, depth=3)
            if not is_regular(P):
                c.fails.append((s, "irregular"))
                continue
            gens = [g.stems for g in P.generators]
            for i, S in enumerate(P.generators):
                for T in P.generators[i:]:
                    if almost_disjoint(S, T):
                        if compat_witness(P, S, T) is not None:
                            c.fails.append((s, "ad pair got a witness"))
                        continue
                    pairs += 1
                    X = compat_witness(P, S, T)
                    bx = oracle.body(X.stems, 4)
                    if bx != oracle.body(S.stems, 4) & oracle.body(T.stems, 4):
                        c.fails.append((s, "not the meet"))
                    # rebuild X as a union of member cones x, each inside a generator
                    cones = [x for x in bx if any(x in oracle.body(g, 4) for g in gens)]
                    if set(cones) != set(bx):
                        c.fails.append((s, "not in clg"))
        c.note = f"({pairs} non-a.d. pairs)"


def test_crit_03_surgery():
    L = 7
    with Crit(3, 10) as c:
        for s in range(500):
            r = random.Random(s)
            P = random_forcing(r, depth=3)
            S = random_clg(r, P)
            n = r.randint(0, 4)
            u = r.choice(S.slice(n))
            Su = restrict_clopen(S, u)
            v = r.choice([x for x in Su.slice(n + r.randint(0, 2))])
            T = restrict_clopen(Su, v)
            S2 = splice(S, u, T, n)
            if not oracle.lec(n, S2.stems, n, S.stems, L):
                c.fails.append((s, "nq lec"))
            if oracle.restrict_body(S2.stems, u, L) != oracle.body(T.stems, L):
                c.fails.append((s, "nq at u"))
            for w in S.slice(n):
                if w != u and oracle.restrict_body(S2.stems, w, L) != \
                        oracle.restrict_body(S.stems, w, L):
                    c.fails.append((s, "nq elsewhere"))
            if not oracle.covered(S2.stems, [g.stems for g in P.generators], L):
                c.fails.append((s, "nq clg"))
        for s in range(500):
            r = random.Random(10_000 + s)
            P = random_forcing(r, depth=3)
            T = random_clg(r, P)
            n = r.randint(0, 3)
            S = normalize(P, T, n, lambda node, kids: r.choice(kids))
            if not oracle.lec(n, S.stems, n, T.stems, L):
                c.fails.append((s, "suz0 lec"))
            for t in S.slice(n):
                if not is_member(P, restrict_clopen(S, t)):
                    c.fails.append((s, "suz0 member"))
        for s in range(500):
            r = random.Random(20_000 + s)
            P, P2 = random_forcing(r, depth=3), random_forcing(r, depth=3)
            T, T2 = r.choice(P.generators), r.choice(P2.generators)
            S, S2 = shrink_disjoint(0, T, T2)
            if not (is_member(P, S) and is_member(P2, S2)):
                c.fails.append((s, "suz1 member"))
            if not (oracle.body(S.stems, L) <= oracle.body(T.stems, L)
                    and oracle.body(S2.stems, L) <= oracle.body(T2.stems, L)):
                c.fails.append((s, "suz1 subset"))
            if oracle.body(S.stems, L) & oracle.body(S2.stems, L):
                c.fails.append((s, "suz1 overlap"))
        for s in range(500):
            r = random.Random(30_000 + s)
            P, P2 = random_forcing(r, depth=3), random_forcing(r, depth=3)
            T, T2 = random_clg(r, P), random_clg(r, P2)
            n = r.randint(0, 3)
            S, S2 = shrink_disjoint(n, T, T2)
            Lb = max(L, S.depth, S2.depth)
            if not (oracle.lec(n, S.stems, n, T.stems, Lb)
                    and oracle.lec(n, S2.stems, n, T2.stems, Lb)):
                c.fails.append((s, "suz2 lec"))
            if oracle.body(S.stems, Lb) & oracle.body(S2.stems, Lb):
                c.fails.append((s, "suz2 overlap"))
            if not (clg_member(P, S) and clg_member(P2, S2)):
                c.fails.append((s, "suz2 clg"))


def test_crit_04_engine_dj():
    with Crit(4, 300) as c:
        for s in range(100):
            r = random.Random(s)
            pi = random_multiforcing(r)
            rho, tr = generic_refine(pi, mandatory_tasks(pi, depth=10, k_max=3), seed=s)
            rep = verify_dj(pi, rho, tr, 10)
            if not rep:
                c.fails.append((s, rep.failed()))
        for s in range(20):
            r = random.Random(1000 + s)
            p0 = random_multiforcing(r)
            r1, _ = generic_refine(p0, mandatory_tasks(p0, depth=10, k_max=3), seed=s)
            p1 = cw_union(p0, r1)
            r2, t2 = generic_refine(p1, mandatory_tasks(p1, depth=10, k_max=3, chain=[p0, r1]),
                                    seed=s)
            rep = verify_dj(p1, r2, t2, 10, chain=[p0, r1])
            if not rep:
                c.fails.append(("chained", s, rep.failed()))


def test_crit_05_sealing_dense_sets():
    with Crit(5, 180) as c:
        for s in range(50):
            r, pi = _rho_run(s)
            Ds = [random_dense(r, pi, f"D{s}_{i}") for i in range(2)]
            rho, tr = generic_refine(pi, mandatory_tasks(pi, dense_pool=Ds, depth=4, k_max=2),
                                     seed=s)
            u = cw_union(pi, rho)
            for D in Ds:
                if not verify_uu4(pi, D, rho, 4, tr):
                    c.fails.append((s, D.id, "mseals"))
                if not is_predense(D, u, base=pi):
                    c.fails.append((s, D.id, "predense"))


def test_crit_06_name_sealing():
    with Crit(6, 180) as c:
        for s in range(50):
            r, pi = _rho_run(s)
            names = [random_name(r, pi, 3) for _ in range(2)]
            assert all(is_complete(x, pi) for x in names)
            rho, tr = generic_refine(pi, mandatory_tasks(pi, name_pool=names, depth=4, k_max=2),
                                     seed=s)
            u = cw_union(pi, rho)
            levels = list(tr.seal_levels) + list(range(5))
            for x in names:
                if not name_sealed(pi, x, rho, 4, tr.witnesses, levels):
                    c.fails.append((s, x.id, "sealed"))
                if not is_complete(x, u):
                    c.fails.append((s, x.id, "complete"))


def _two_index(s):
    r = random.Random(s)
    pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
    while len(pi) < 2:
        pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
    return r, pi


def test_crit_07_avoidance():
    with Crit(7, 300) as c:
        filters = 0
        for s in range(30):
            r, pi = _two_index(s)
            xi, eta = sorted(pi.support)
            # the generic real at eta is a name that is non-principal at xi
            name = principal_name(eta, 6)
            assert is_nonprincipal(name, pi, xi)
            rho, tr = generic_refine(pi, mandatory_tasks(pi, avoid_pool=[(name, xi)], depth=4,
                                                         k_max=2), seed=s)
            if not verify_avoidance(pi, name, xi, rho, 4, tr):
                c.fails.append((s, "avoidance"))
            u = cw_union(pi, rho)
            Ds = [avoid_dense(name, xi, Q, id=avoid_id(name, xi, k))
                  for k, Q in enumerate(rho[xi].generators)]
            Ds += [cone_dense(name, n) for n in range(name.horizon)]
            layer = [proj(Q) for Q in rho[xi].generators]
            for f in range(10):
                rr = random.Random(f)
                Q = rr.choice(rho[xi].generators)
                st = rr.choice(proj(Q).slice(proj(Q).depth))
                G = build_filter(u, Ds, seed=f, start=Multitree({xi: restrict(Q, st)}), base=pi)
                bits = defined_prefix(eval_name(name, G))
                filters += 1
                if not bits or any(bits in X for X in layer):
                    c.fails.append((s, f, bits))
        c.note = f"({filters} filters)"


def test_crit_08_principality_boundary():
    with Crit(8, 60) as c:
        for s in range(100):
            r = random.Random(s)
            pi = random_multiforcing(r, max_indices=3, max_gens=3, depth=2)
            while len(pi) < 2:
                pi = random_multiforcing(r, max_indices=3, max_gens=3, depth=2)
            xi, other = r.sample(sorted(pi.support), 2)
            name = principal_name(xi, 3)
            if is_nonprincipal(name, pi, xi):
                c.fails.append((s, "own index"))
            if not is_nonprincipal(name, pi, other):
                c.fails.append((s, "other index"))


@pytest.mark.parametrize("family", ["a", "b"])
def test_crit_09_ablation(family):
    with Crit(9, 120) as c:
        broken = 0
        for s in range(20):
            r = random.Random(s)
            pi = random_multiforcing(r)
            rho, tr = generic_refine(pi, mandatory_tasks(pi, depth=10, k_max=3), seed=s,
                                     ablate=[family])
            if not verify_dj(pi, rho, tr, 10):
                broken += 1
        c.note = f"(family {family}: {broken}/20 runs fail)"
        if broken == 0:
            c.fails.append(family)


def _perm_dense(h, D):
    return cone_or_incompatible(D.id, perm_apply(h, D.p0))


def test_crit_10_permutation_invariance():
    pool = []
    for s in range(10):
        r, pi = _two_index(s)
        D = random_dense(r, pi, f"D{s}")
        name = random_name(r, pi, 3)
        rho, tr = generic_refine(pi, mandatory_tasks(pi, dense_pool=[D], depth=4, k_max=2),
                                 seed=s)
        pool.append((pi, rho, tr, D, name))
    with Crit(10, 30) as c:
        for s in range(300):
            r = random.Random(s)
            pi, rho, tr, D, name = pool[s % len(pool)]
            h = random_involution(r)
            if h.compose(h) or perm_apply(h, perm_apply(h, pi)) != pi:
                c.fails.append((s, "involution"))
            hp = lambda x: perm_apply(h, x)  # noqa: E731
            p, q = random_multitree(r, pi), random_multitree(r, pi)
            checks = {
                "mt_member": (mt_member(pi, p), mt_member(hp(pi), hp(p))),
                "mleq": (mleq(q, p), mleq(hp(q), hp(p))),
                "sad": (sad(p, q), sad(hp(p), hp(q))),
                "is_real_name": (is_real_name(name), is_real_name(hp(name))),
                "is_complete": (is_complete(name, pi), is_complete(hp(name), hp(pi))),
                "mrefines": (mrefines(pi, rho, 4).holds, mrefines(hp(pi), hp(rho), 4).holds),
            }
            if s % 3 == 0:
                xi = r.choice(sorted(pi.support))
                checks["is_nonprincipal"] = (is_nonprincipal(name, pi, xi),
                                             is_nonprincipal(hp(name), hp(pi), h(xi)))
                checks["mseals"] = (verify_uu4(pi, D, rho, 4, tr).holds,
                                    verify_uu4(hp(pi), _perm_dense(h, D), hp(rho), 4,
                                               hp(tr)).holds)
            for k, (a, b) in checks.items():
                if a != b:
                    c.fails.append((s, k))


def test_crit_11_genericity_criterion():
    with Crit(11, 120) as c:
        for s in range(20):
            r = random.Random(s)
            pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
            seq = MfSequence.start(pi)
            for j in range(3):
                seq = step_extend(seq, seed=s * 10 + j, depth=4, k_max=2)
            xi = min(pi.support)
            u = seq.union()
            Q = seq.terms[-1][xi].generators[0]
            st = proj(Q).slice(proj(Q).depth)[0]
            G = build_filter(u, [cone_dense(principal_name(xi, 6), n) for n in range(6)],
                             seed=s, start=Multitree({xi: restrict(Q, st)}))
            x = extract_real(G, xi, 4)
            if not check_xik3(seq, xi, x):
                c.fails.append((s, "through-filter real rejected", x))
            y = real_outside_layer(u, xi, seq.terms[1][xi], 4)
            if y is None or check_xik3(seq, xi, y):
                c.fails.append((s, "real outside a layer accepted", y))


def _values(r: random.Random, i: int, engine: dict):
    """One random value of every serializable type."""
    pi = random_multiforcing(r, max_indices=3, max_gens=4, depth=3)
    chain = random_chain(r, length=r.randint(1, 4))
    key = i % len(engine)
    rho, tr, seq = engine[key]
    G = FiniteFilter([Multitree(), random_multitree(r, pi)], [f"m{i}"])
    return [random_clopen(r, 4), fuse(chain), random_forcing(r), random_multitree(r, pi), pi,
            random_name(r, pi, r.randint(0, 4)), tr.steps[r.randrange(len(tr.steps))][1],
            tr, seq, G, random_involution(r), rho]


def test_crit_12_determinism_roundtrip(tmp_path):
    engine = {}
    for s in range(20):
        r = random.Random(s)
        pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
        D = random_dense(r, pi, f"D{s}")
        rho, tr = generic_refine(pi, mandatory_tasks(pi, dense_pool=[D], depth=3, k_max=2),
                                 seed=s)
        seq = step_extend(MfSequence.start(pi), seed=s, depth=3)
        engine[s] = (rho, tr, seq)
    with Crit(12, 30) as c:
        for s in range(5):
            r = random.Random(s)
            pi = random_multiforcing(r)
            a = generic_refine(pi, mandatory_tasks(pi, depth=6, k_max=3), seed=s)
            b = generic_refine(pi, mandatory_tasks(pi, depth=6, k_max=3), seed=s)
            if dumps(a[0]) != dumps(b[0]) or dumps(a[1]) != dumps(b[1]):
                c.fails.append((s, "engine rerun differs"))
        runner = CliRunner()
        pi_file = tmp_path / "pi.json"
        runner.invoke(cli, ["gen", "--seed", "3", "--out", str(pi_file)], catch_exceptions=False)
        outs = []
        for k in range(2):
            d = tmp_path / f"run{k}"
            res = runner.invoke(cli, ["refine", str(pi_file), "--seed", "3", "--depth", "6",
                                      "--out", str(d)])
            if res.exit_code != 0:
                c.fails.append(("cli", res.output))
            outs.append(((d / "rho.json").read_bytes(), (d / "trace.json").read_bytes()))
        if outs[0] != outs[1]:
            c.fails.append("cli rerun differs")
        kinds = set()
        for i in range(1000):
            r = random.Random(i)
            for x in _values(r, i, engine):
                kinds.add(type(x).__name__)
                text = dumps(x)
                y = loads(text)
                if y != x or dumps(y) != text:
                    c.fails.append((i, type(x).__name__))
        c.note = f"({len(kinds)} types)"
        if len(kinds) < 11:
            c.fails.append(("types", sorted(kinds)))
