"""Command line: ptforce refine | verify | sequence | filter | eval | perm | ...

Exit codes: 0 pass, 1 verified false, 2 input error, 3 resource or budget.
"""
from __future__ import annotations

import hashlib
import json
import os
import random
import sys

import click

from . import __version__
from .errors import DepthExceeded, InputError, PtforceError, ResourceError
from .extlab import (FiniteFilter, MfSequence, Permutation, build_filter, eval_name,
                     extract_real, perm_apply, step_extend)
from .multi import DEFAULT_BUDGET, Multiforcing, Multitree
from .names import RealName, cone_dense, principal_name
from .randgen import random_multiforcing
from .refine import (FAMILIES, MAX_TASKS, RefinementTrace, generic_refine,
                     mandatory_tasks, verify_avoidance, verify_dj)
from .serialize import dumps, load, save, to_obj, write_atomic
from .trees import ClopenTree, proj, restrict

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


def digest(x) -> str:
    return hashlib.sha256(dumps(x).encode()).hexdigest()[:16]


def _plain(x):
    if isinstance(x, ClopenTree):
        return list(x.stems)
    if isinstance(x, (Multitree, Multiforcing, RealName)):
        return to_obj(x)
    if isinstance(x, (tuple, list)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if isinstance(x, frozenset):
        return sorted(_plain(v) for v in x)
    return repr(x)


def _write_json(path, obj):
    write_atomic(path, json.dumps(obj, sort_keys=True, indent=1))


def _load_as(path, kind, what):
    x = load(path)
    if not isinstance(x, kind):
        raise InputError(f"{path}: expected {what}, got {type(x).__name__}")
    return x


def _check_bounds(pi: Multiforcing, index_bound: int):
    bad = [xi for xi in pi.support if xi >= index_bound]
    if bad:
        raise InputError(f"indices {sorted(bad)} not below --index-bound {index_bound}")


def _parse_pair(s: str, what: str):
    try:
        a, b = s.split(":")
        return a, int(b)
    except ValueError:
        raise InputError(f"bad {what} {s!r}, expected A:B") from None


def _config(**kw):
    kw["version"] = __version__
    return kw


seed_opt = click.option("--seed", type=int, default=0, show_default=True)
depth_opt = click.option("--depth", type=click.IntRange(0), default=8, show_default=True)
kmax_opt = click.option("--kmax", type=click.IntRange(1), default=4, show_default=True)
bound_opt = click.option("--index-bound", type=click.IntRange(1), default=64, show_default=True)
budget_opt = click.option("--budget", type=click.IntRange(1), default=DEFAULT_BUDGET,
                          show_default=True, help="node limit for searches")


@click.group()
@click.version_option(__version__)
def cli():
    """Fusion refinements of clopen arboreal multiforcings."""


@cli.command()
@seed_opt
@bound_opt
@click.option("--indices", type=click.IntRange(1), default=2, show_default=True,
              help="at most this many indices")
@click.option("--gens", type=click.IntRange(1), default=3, show_default=True,
              help="at most this many generators per component")
@click.option("--gen-depth", type=click.IntRange(0), default=3, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def gen(seed, index_bound, indices, gens, gen_depth, out):
    """Write a random multiforcing."""
    pi = random_multiforcing(random.Random(seed), indices, gens, gen_depth, index_bound)
    save(out, pi)
    return EXIT_OK


@cli.command()
@click.option("--xi", type=click.IntRange(0), required=True)
@click.option("--horizon", type=click.IntRange(0), required=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def name(xi, horizon, out):
    """Write the principal name of xi with the given horizon."""
    save(out, principal_name(xi, horizon))
    return EXIT_OK


@cli.command()
@click.argument("input", type=click.Path())
@seed_opt
@depth_opt
@kmax_opt
@bound_opt
@budget_opt
@click.option("--max-tasks", type=click.IntRange(1), default=MAX_TASKS, show_default=True)
@click.option("--ablate", multiple=True, type=click.Choice(FAMILIES))
@click.option("--name", "names", multiple=True, help="name file to seal")
@click.option("--avoid", multiple=True, help="NAMEFILE:XI avoidance task")
@click.option("--out", required=True, type=click.Path(file_okay=False))
def refine(input, seed, depth, kmax, index_bound, budget, max_tasks, ablate, names, avoid, out):
    """Refine a multiforcing; writes rho.json and trace.json."""
    pi = _load_as(input, Multiforcing, "a multiforcing")
    _check_bounds(pi, index_bound)
    pool = [_load_as(f, RealName, "a name") for f in names]
    apool = []
    for item in avoid:
        f, xi = _parse_pair(item, "--avoid")
        apool.append((_load_as(f, RealName, "a name"), xi))
    tasks = mandatory_tasks(pi, pool, (), depth, kmax, apool, max_tasks=max_tasks)
    rho, trace = generic_refine(pi, tasks, seed=seed, depth=depth, ablate=ablate)
    trace.config.update(_config(pi_digest=digest(pi), kmax=kmax, index_bound=index_bound,
                                budget=budget))
    os.makedirs(out, exist_ok=True)
    save(os.path.join(out, "rho.json"), rho)
    save(os.path.join(out, "trace.json"), trace)
    click.echo(f"refined {len(pi)} components, {len(trace.steps)} steps, "
               f"n={trace.n_final}")
    return EXIT_OK


@cli.command()
@click.argument("pi_file", type=click.Path())
@click.argument("rho_file", type=click.Path())
@click.argument("trace_file", type=click.Path())
@click.option("--depth", type=click.IntRange(0), default=None)
@click.option("--avoid", multiple=True, help="NAMEFILE:XI avoidance to check")
@budget_opt
@click.option("--out", required=True, type=click.Path(file_okay=False))
def verify(pi_file, rho_file, trace_file, depth, avoid, budget, out):
    """Check a refinement; writes report.json.  Exit 0 iff every clause holds."""
    pi = _load_as(pi_file, Multiforcing, "a multiforcing")
    rho = _load_as(rho_file, Multiforcing, "a multiforcing")
    trace = _load_as(trace_file, RefinementTrace, "a trace")
    want = trace.config.get("pi_digest")
    if want is not None and want != digest(pi):
        raise InputError("trace was produced for a different multiforcing")
    if depth is None:
        depth = int(trace.config.get("depth", 0))
    rep = verify_dj(pi, rho, trace, depth)
    report = {"schema": "ptforce/report", "depth": depth,
              "clauses": _plain(rep.clauses), "config": _config(**trace.config)}
    holds = rep.holds
    av = []
    for item in avoid:
        f, xi = _parse_pair(item, "--avoid")
        c = _load_as(f, RealName, "a name")
        v = verify_avoidance(pi, c, xi, rho, depth, trace, budget)
        av.append({"name": c.id, "xi": xi, "holds": v.holds, "failures": _plain(v.failures[:20])})
        holds = holds and v.holds
    report["avoidance"] = av
    report["holds"] = holds
    _write_json(os.path.join(out, "report.json"), report)
    for k, v in rep.clauses.items():
        click.echo(f"clause {k}: {'holds' if v['holds'] else 'FAILS'}")
        if not v["holds"]:
            click.echo(f"  witness: {json.dumps(_plain(v['failures'][:1]))}")
    for a in av:
        click.echo(f"avoidance {a['name']} at {a['xi']}: {'holds' if a['holds'] else 'FAILS'}")
    return EXIT_OK if holds else EXIT_FALSE


@cli.command()
@click.option("--steps", type=click.IntRange(0), default=2, show_default=True)
@click.option("--input", "input_", type=click.Path(), default=None, help="start multiforcing")
@seed_opt
@click.option("--depth", type=click.IntRange(0), default=4, show_default=True)
@click.option("--kmax", type=click.IntRange(1), default=2, show_default=True)
@bound_opt
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def sequence(steps, input_, seed, depth, kmax, index_bound, out):
    """Build a refinement sequence of the given number of steps."""
    if input_:
        pi = _load_as(input_, Multiforcing, "a multiforcing")
    else:
        pi = random_multiforcing(random.Random(seed), 2, 2, 2, index_bound)
    _check_bounds(pi, index_bound)
    seq = MfSequence.start(pi)
    for j in range(steps):
        seq = step_extend(seq, seed=seed * 1000 + j, depth=depth, k_max=kmax)
    save(out, seq)
    return EXIT_OK


@cli.command(name="filter")
@click.argument("input", type=click.Path())
@click.option("--name", "names", multiple=True, help="name file whose bits to decide")
@click.option("--decide", multiple=True, help="XI:H decides H bits of x_XI")
@click.option("--through", type=int, default=None,
              help="start inside a last-term generator at this index")
@seed_opt
@budget_opt
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def filter_(input, names, decide, through, seed, budget, out):
    """Build a finite filter meeting the cone sets of the given names."""
    x = load(input)
    if isinstance(x, MfSequence):
        pi, last = x.union(), x.terms[-1]
    elif isinstance(x, Multiforcing):
        pi, last = x, x
    else:
        raise InputError("filter input must be a sequence or a multiforcing")
    pool = [_load_as(f, RealName, "a name") for f in names]
    for item in decide:
        xi, h = _parse_pair(item, "--decide")
        pool.append(principal_name(int(xi), h))
    dense = [cone_dense(c, n) for c in pool for n in range(c.horizon)]
    start = None
    if through is not None:
        if through not in last:
            raise InputError(f"index {through} not in the last term")
        rng = random.Random(seed)
        Q = rng.choice(last[through].generators)
        s = rng.choice(proj(Q).slice(proj(Q).depth))
        start = Multitree({through: restrict(Q, s)})
    G = build_filter(pi, dense, seed=seed, budget=budget, start=start)
    save(out, G)
    return EXIT_OK


@cli.command(name="eval")
@click.argument("name_file", type=click.Path())
@click.argument("filter_file", type=click.Path())
def eval_(name_file, filter_file):
    """Print c[G]; '?' marks undecided bits."""
    c = _load_as(name_file, RealName, "a name")
    G = _load_as(filter_file, FiniteFilter, "a filter")
    click.echo(eval_name(c, G))
    return EXIT_OK


@cli.command()
@click.argument("filter_file", type=click.Path())
@click.option("--xi", type=int, required=True)
@click.option("--depth", type=click.IntRange(0), required=True)
def extract(filter_file, xi, depth):
    """Print the level-depth prefix of x_xi fixed by the filter."""
    G = _load_as(filter_file, FiniteFilter, "a filter")
    click.echo(extract_real(G, xi, depth))
    return EXIT_OK


@cli.command()
@click.argument("object_file", type=click.Path())
@click.option("--swap", multiple=True, help="A:B transposition (disjoint)")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def perm(object_file, swap, out):
    """Relabel the indices of an object along an involution."""
    pairs = []
    for item in swap:
        a, b = _parse_pair(item, "--swap")
        pairs.append((int(a), b))
    h = Permutation.swaps(pairs)
    save(out, perm_apply(h, load(object_file)))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="ptforce", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_INPUT
    except click.exceptions.Abort:
        return EXIT_INPUT
    except (ResourceError, DepthExceeded) as e:
        click.echo(json.dumps({"error": type(e).__name__, "detail": str(e)}), err=True)
        return EXIT_RESOURCE
    except (InputError, PtforceError) as e:
        click.echo(json.dumps({"error": type(e).__name__, "detail": str(e)}), err=True)
        return EXIT_INPUT
    return rv if isinstance(rv, int) else EXIT_OK


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
