import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gen import engine
from ptforce.arboreal import cohen
from ptforce.errors import InputError, NoSplitLevel
from ptforce.extlab import FiniteFilter, eval_name
from ptforce.multi import (Multiforcing, Multitree, cw_union, family, is_dense, is_predense,
                           mleq, mt_member, sad)
from ptforce.names import (RealName, avoid_dense, avoid_set, cone_set, decide_value,
                           directly_forces_avoid, directly_forces_prefix, directly_forces_value,
                           force_avoid, forced_prefix, is_complete, is_nonprincipal,
                           is_real_name, name_sealed, principal_name)
from ptforce.randgen import random_multiforcing, random_multitree, random_name
from ptforce.trees import ClopenTree, cone, full, restrict

seeds = st.integers(0, 10 ** 6)
L0 = Multitree()
PI = Multiforcing({0: cohen(), 1: cohen()})


def at(xi, T):
    return Multitree({xi: T})


def test_is_real_name_examples():
    assert is_real_name(RealName([], 0))
    c = RealName([(at(0, cone("0")), 0, 0), (at(0, cone("1")), 0, 1)], 1)
    assert is_real_name(c)
    p = at(0, cone("0"))
    assert not is_real_name(RealName([(p, 0, 0), (p, 0, 1)], 1))


def test_name_rejects_bad_triples():
    with pytest.raises(InputError):
        RealName([(L0, 2, 0)], 2)
    with pytest.raises(InputError):
        RealName([(L0, 0, 2)], 1)


def test_principal_name_examples():
    c = principal_name(0, 3)
    (p0,), (p1,) = c.K(0, 0), c.K(0, 1)
    assert p0[0] == cone("0") == ClopenTree(1, ["0"])
    assert sad(p0, p1)
    G = FiniteFilter([L0, at(0, cone("01"))])
    assert eval_name(principal_name(0, 2), G) == "01"


def test_cone_set_examples():
    c0 = RealName([], 2)
    assert cone_set(c0, PI, 0) == []
    top = RealName([(L0, 0, 0)], 1)
    assert cone_set(top, PI, 0) == family(PI)
    small = Multiforcing({0: cohen(1)})
    c = principal_name(0, 2)
    assert set(cone_set(c, small, 1)) <= set(cone_set(c, cw_union(small, PI), 1))


def test_is_complete_examples():
    assert is_complete(principal_name(0, 3), PI)
    half = RealName([(at(0, cone("0")), 0, 0)], 1)
    assert not is_complete(half, PI)
    assert is_complete(RealName([], 0), PI)


def test_direct_forcing_examples():
    c = principal_name(0, 2)
    q = c.K(0, 1)[0]
    assert directly_forces_value(q, c, 0, 1)
    assert directly_forces_prefix(L0, c, "")
    p = at(0, cone("11"))
    assert directly_forces_prefix(p, c, "1")
    assert directly_forces_avoid(p, c, cone("0"))
    assert not directly_forces_avoid(p, c, full())


def test_decide_value_examples():
    c = principal_name(0, 3)
    i, q = decide_value(PI, c, L0, 0)
    assert (i, q) == (0, at(0, cone("0")))
    p = at(0, cone("11"))
    assert decide_value(PI, c, p, 1) == (1, p)
    with pytest.raises(InputError):
        decide_value(PI, c, L0, 3)


@pytest.mark.parametrize("T", [full(), cone("0"), ClopenTree(2, ["00", "11"])])
def test_force_avoid_postcondition(T):
    c = principal_name(0, 2)
    s, q = force_avoid(PI, c, L0, T)
    assert s in T and mleq(q, L0) and mt_member(PI, q)
    assert directly_forces_avoid(q, c, restrict(T, s))


def test_force_avoid_needs_a_split():
    with pytest.raises(NoSplitLevel):
        force_avoid(PI, principal_name(0, 2), L0, cone("000"))


def test_is_nonprincipal_examples():
    assert not is_nonprincipal(principal_name(0, 3), PI, 0)
    assert is_nonprincipal(principal_name(1, 4), PI, 0)
    assert not is_nonprincipal(RealName([], 0), PI, 0)
    assert not is_nonprincipal(principal_name(1, 3), PI, 5)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_escape_needs_bits_beyond_the_family(d):
    # a name can only escape [p(xi)] once it decides more bits than members can fix
    pi = Multiforcing({0: cohen(d), 1: cohen(d)})
    assert not is_nonprincipal(principal_name(1, d), pi, 0)
    assert is_nonprincipal(principal_name(1, d + 1), pi, 0)


def test_name_sealed_examples():
    pi = Multiforcing({0: cohen(1), 1: cohen(1)})
    c = principal_name(1, 2)
    rho, tr = engine(pi, seed=0, depth=4, name_pool=[c])
    assert name_sealed(pi, c, rho, 4, tr.witnesses, list(tr.seal_levels) + list(range(5)))
    assert name_sealed(pi, RealName([], 0), rho, 4)


def test_avoid_set_examples():
    c = principal_name(1, 2)
    assert avoid_set(PI, c, 0, full()) == []
    r = Multitree({0: cone("1"), 1: cone("00")})
    assert r in avoid_set(PI, c, 0, cone("1"))
    small = avoid_set(PI, c, 0, cone("0"))
    smaller = avoid_set(PI, c, 0, cone("00"))
    assert set(small) <= set(smaller)


# properties

@given(seeds)
def test_direct_forcing_is_monotone(seed):
    r = random.Random(seed)
    pi = random_multiforcing(r, max_indices=2, depth=2)
    c = random_name(r, pi, 3)
    T = ClopenTree.from_stems([r.choice(["0", "1", "00", "01", "10", "11"])])
    for _ in range(5):
        p = random_multitree(r, pi)
        q = random_multitree(r, pi).merge(p)
        if not mleq(q, p):
            continue
        for n in range(c.horizon):
            for i in (0, 1):
                if directly_forces_value(p, c, n, i):
                    assert directly_forces_value(q, c, n, i)
        s = forced_prefix(p, c)
        assert directly_forces_prefix(q, c, s)
        if directly_forces_avoid(p, c, T):
            assert directly_forces_avoid(q, c, T)


@given(seeds)
def test_no_condition_forces_both_values(seed):
    r = random.Random(seed)
    pi = random_multiforcing(r, max_indices=2, depth=2)
    c = random_name(r, pi, 3)
    assert is_real_name(c)
    for p in family(pi):
        for n in range(c.horizon):
            assert not (directly_forces_value(p, c, n, 0) and directly_forces_value(p, c, n, 1))


@pytest.mark.parametrize("seed", range(10))
def test_sealed_names_stay_complete(seed):
    r = random.Random(seed)
    pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
    c = random_name(r, pi, 3)
    rho, tr = engine(pi, seed=seed, depth=4, name_pool=[c])
    assert name_sealed(pi, c, rho, 4, tr.witnesses, list(tr.seal_levels) + list(range(5)))
    assert is_complete(c, pi) and is_complete(c, cw_union(pi, rho))


@pytest.mark.parametrize("seed", range(6))
def test_avoid_sets_dense_and_predense_under_avoidance(seed):
    r = random.Random(seed)
    pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
    while len(pi) < 2:
        pi = random_multiforcing(r, max_indices=2, max_gens=2, depth=2)
    xi, eta = sorted(pi.support)
    c = principal_name(eta, 6)
    rho, _ = engine(pi, seed=seed, depth=4, avoid_pool=[(c, xi)])
    u = cw_union(pi, rho)
    for Q in rho[xi].generators:
        D = avoid_dense(c, xi, Q)
        assert is_dense(D, pi)
        assert is_predense(D, u, base=pi)
