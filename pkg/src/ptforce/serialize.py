"""JSON container format: every typed node carries a "schema" field.

Indices are decimal strings, bit strings are text.  dumps() is canonical
(sorted keys, fixed separators), so equal values give identical bytes.
"""
from __future__ import annotations

import json
import os
import tempfile
from typing import Any

from .arboreal import ArborealForcing
from .errors import InputError
from .extlab import FiniteFilter, MfSequence, Permutation
from .multi import Multiforcing, Multitree, _pkey
from .names import RealName
from .refine import RefinementTrace, System
from .trees import ClopenTree, FusionTree, check_bits

PREFIX = "ptforce/"


def _s(name: str) -> str:
    return PREFIX + name


def to_obj(x: Any) -> Any:
    if isinstance(x, ClopenTree):
        return {"schema": _s("clopen"), "stems": list(x.stems)}
    if isinstance(x, FusionTree):
        return {"schema": _s("fusion"),
                "chain": [[n, list(T.stems)] for n, T in x.chain],
                "log": [[t, j] for t, j in x.log]}
    if isinstance(x, ArborealForcing):
        return {"schema": _s("forcing"), "generators": [to_obj(g) for g in x.generators]}
    if isinstance(x, Multitree):
        return {"schema": _s("multitree"), "map": {str(k): to_obj(v) for k, v in x.items}}
    if isinstance(x, Multiforcing):
        return {"schema": _s("multiforcing"), "map": {str(k): to_obj(v) for k, v in x.items}}
    if isinstance(x, RealName):
        return {"schema": _s("name"), "horizon": x.horizon, "id": x.id,
                "triples": [[to_obj(p), n, i] for p, n, i in x.triples]}
    if isinstance(x, System):
        return {"schema": _s("system"),
                "entries": [[str(xi), k, list(T.stems)] for (xi, k), T in x.items]}
    if isinstance(x, RefinementTrace):
        wit = []
        for (did, pkey, ukey), qs in sorted(x.witnesses.items(), key=lambda e: repr(e[0])):
            wit.append({"set": did,
                        "p": {str(xi): list(st) for xi, st in pkey},
                        "u": [[str(xi), k] for xi, k in ukey],
                        "qs": [to_obj(q) for q in qs]})
        return {"schema": _s("trace"),
                "steps": [[n, to_obj(phi)] for n, phi in x.steps],
                "schedule": [[tid, j] for tid, j in x.schedule],
                "j_of": [[str(xi), k, j] for (xi, k), j in sorted(x.j_of.items())],
                "seal_levels": list(x.seal_levels),
                "witnesses": wit,
                "config": x.config}
    if isinstance(x, MfSequence):
        certs = [None if c is None else {"trace": to_obj(c["trace"]), "tasks": list(c["tasks"])}
                 for c in x.certificates]
        return {"schema": _s("sequence"), "terms": [to_obj(t) for t in x.terms],
                "certificates": certs, "crucial": list(x.crucial_flags)}
    if isinstance(x, FiniteFilter):
        return {"schema": _s("filter"), "chain": [to_obj(p) for p in x.chain],
                "met": list(x.met)}
    if isinstance(x, Permutation):
        return {"schema": _s("permutation"), "map": {str(a): str(b) for a, b in x.map.items()}}
    raise InputError(f"cannot serialize {type(x).__name__}")


def _idx(s) -> int:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise InputError(f"bad index {s!r}")
    try:
        v = int(s)
    except ValueError:
        raise InputError(f"bad index {s!r}") from None
    if v < 0:
        raise InputError(f"negative index {s!r}")
    return v


def _stems(xs) -> tuple:
    if not isinstance(xs, list) or not xs:
        raise InputError("a tree needs a nonempty stem list")
    for s in xs:
        if not isinstance(s, str):
            raise InputError(f"stem {s!r} is not a string")
        check_bits(s)
    return tuple(xs)


def _clopen(xs) -> ClopenTree:
    return ClopenTree.from_stems(_stems(xs))


def from_obj(o: Any) -> Any:
    if not isinstance(o, dict) or "schema" not in o:
        raise InputError("missing schema field")
    kind = o["schema"]
    if not isinstance(kind, str) or not kind.startswith(PREFIX):
        raise InputError(f"unknown schema {kind!r}")
    kind = kind[len(PREFIX):]
    try:
        return _PARSERS[kind](o)
    except KeyError as e:
        if kind not in _PARSERS:
            raise InputError(f"unknown schema {kind!r}") from None
        raise InputError(f"missing field {e}") from None
    except (TypeError, ValueError, AttributeError) as e:
        raise InputError(f"malformed {kind}: {e}") from None


def _tree(o):
    T = from_obj(o)
    if not isinstance(T, (ClopenTree, FusionTree)):
        raise InputError("expected a tree")
    return T


def _fusion(o):
    chain = tuple((int(n), _clopen(st)) for n, st in o["chain"])
    if not chain:
        raise InputError("empty fusion chain")
    log = tuple((check_bits(t), int(j)) for t, j in o.get("log", []))
    return FusionTree(chain, log)


def _multitree(o):
    return Multitree({_idx(k): _tree(v) for k, v in o["map"].items()})


def _multiforcing(o):
    out = {}
    for k, v in o["map"].items():
        P = from_obj(v)
        if not isinstance(P, ArborealForcing):
            raise InputError("expected a forcing")
        out[_idx(k)] = P
    return Multiforcing(out)


def _name(o):
    trip = [(from_obj(p), n, i) for p, n, i in o["triples"]]
    for p, _, _ in trip:
        if not isinstance(p, Multitree):
            raise InputError("name triples need multitrees")
    return RealName(trip, int(o["horizon"]), o.get("id"))


def _system(o):
    return System({(_idx(xi), int(k)): _clopen(st) for xi, k, st in o["entries"]})


def _trace(o):
    steps = []
    for n, phi in o["steps"]:
        S = from_obj(phi)
        if not isinstance(S, System):
            raise InputError("trace steps need systems")
        steps.append((int(n), S))
    wit = {}
    for w in o["witnesses"]:
        pkey = _pkey(Multitree({_idx(k): _clopen(v) for k, v in w["p"].items()}))
        ukey = tuple((_idx(xi), int(k)) for xi, k in w["u"])
        wit[(w["set"], pkey, ukey)] = [from_obj(q) for q in w["qs"]]
    return RefinementTrace(steps, [(tid, int(j)) for tid, j in o["schedule"]],
                           {(_idx(xi), int(k)): int(j) for xi, k, j in o["j_of"]},
                           [int(x) for x in o["seal_levels"]], wit, dict(o["config"]))


def _sequence(o):
    certs = [None if c is None else {"trace": from_obj(c["trace"]), "tasks": list(c["tasks"])}
             for c in o["certificates"]]
    return MfSequence([from_obj(t) for t in o["terms"]], certs, [bool(b) for b in o["crucial"]])


_PARSERS = {
    "clopen": lambda o: _clopen(o["stems"]),
    "fusion": _fusion,
    "forcing": lambda o: ArborealForcing([_tree(g) for g in o["generators"]]),
    "multitree": _multitree,
    "multiforcing": _multiforcing,
    "name": _name,
    "system": _system,
    "trace": _trace,
    "sequence": _sequence,
    "filter": lambda o: FiniteFilter([from_obj(p) for p in o["chain"]], list(o["met"])),
    "permutation": lambda o: Permutation({_idx(a): _idx(b) for a, b in o["map"].items()}),
}


def dumps(x: Any) -> str:
    return json.dumps(to_obj(x), sort_keys=True, separators=(",", ":"))


def loads(s: str) -> Any:
    try:
        o = json.loads(s)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e}") from None
    return from_obj(o)


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
            f.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(path: str, x: Any) -> None:
    write_atomic(path, dumps(x))


def load(path: str) -> Any:
    try:
        with open(path) as f:
            return loads(f.read())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
