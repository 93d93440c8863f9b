import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gen import engine, random_involution
from ptforce.arboreal import cohen
from ptforce.errors import InputError
from ptforce.extlab import MfSequence, build_filter, step_extend
from ptforce.multi import Multiforcing, Multitree
from ptforce.names import cone_dense, principal_name
from ptforce.randgen import random_multiforcing, random_multitree, random_name
from ptforce.serialize import dumps, load, loads, save
from ptforce.trees import ClopenTree, cone, full

seeds = st.integers(0, 10 ** 6)


@given(seeds)
def test_round_trip_is_byte_stable(seed):
    r = random.Random(seed)
    pi = random_multiforcing(r, depth=2)
    for x in (pi, random_multitree(r, pi, 1), random_name(r, pi, 3), random_involution(r)):
        s = dumps(x)
        assert dumps(loads(s)) == s
        assert loads(s) == x


def test_engine_objects_round_trip():
    pi = Multiforcing({0: cohen(1), 1: cohen(1)})
    rho, tr = engine(pi, seed=2, depth=4, name_pool=[principal_name(0, 2)])
    for x in (rho, tr, tr.final):
        s = dumps(x)
        assert dumps(loads(s)) == s
    seq = step_extend(MfSequence.start(pi), seed=1)
    G = build_filter(pi, [cone_dense(principal_name(1, 2), 0)])
    for x in (seq, G, rho[0].generators[0]):
        s = dumps(x)
        assert dumps(loads(s)) == s


def test_save_and_load(tmp_path):
    p = tmp_path / "sub" / "pi.json"
    pi = Multiforcing({3: cohen(1)})
    save(str(p), pi)
    assert load(str(p)) == pi
    assert not [f for f in p.parent.iterdir() if f.name.startswith(".tmp-")]
    with pytest.raises(InputError):
        load(str(tmp_path / "missing.json"))


def test_canonical_form_ignores_input_layout():
    a = loads('{"schema":"ptforce/clopen","stems":["1","00","01"]}')
    assert a == full() and dumps(a) == dumps(full())
    m = json.loads(dumps(Multitree({2: cone("0"), 10: cone("1")})))
    assert list(m["map"]) == sorted(m["map"])


@pytest.mark.parametrize("text", [
    "{not json",
    "[]",
    '{"stems": ["0"]}',
    '{"schema": "other/clopen", "stems": ["0"]}',
    '{"schema": "ptforce/widget"}',
    '{"schema": "ptforce/clopen"}',
    '{"schema": "ptforce/clopen", "stems": []}',
    '{"schema": "ptforce/clopen", "stems": ["012"]}',
    '{"schema": "ptforce/clopen", "stems": [3]}',
    '{"schema": "ptforce/multitree", "map": {"-1": {"schema": "ptforce/clopen", "stems": [""]}}}',
    '{"schema": "ptforce/multitree", "map": {"x": {"schema": "ptforce/clopen", "stems": [""]}}}',
    '{"schema": "ptforce/multiforcing", "map": {"0": {"schema": "ptforce/clopen", "stems": [""]}}}',
    '{"schema": "ptforce/forcing", "generators": []}',
    '{"schema": "ptforce/fusion", "chain": []}',
    '{"schema": "ptforce/name", "horizon": 1, "triples": [[{"schema": "ptforce/multitree", '
    '"map": {}}, 3, 0]]}',
    '{"schema": "ptforce/permutation", "map": {"0": "1", "1": "2"}}',
])
def test_malformed_input_is_rejected(text):
    with pytest.raises(InputError):
        loads(text)


def test_trees_load_as_given():
    T = loads(dumps(ClopenTree(2, ["00", "11"])))
    assert T.stems == ("00", "11")
