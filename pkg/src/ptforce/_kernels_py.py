"""Pure-Python stem-set kernels.

A stem set is a lex-sorted tuple of bit strings forming a prefix-free
antichain; it stands for the union of the cones above its members.
"""
from bisect import bisect_left
from itertools import product


def _range(stems, p):
    return bisect_left(stems, p), bisect_left(stems, p + "2")


def _has_prefix_in(s, sset):
    for i in range(len(s) + 1):
        if s[:i] in sset:
            return True
    return False


def canon(stems):
    """Canonical antichain: drop extensions, merge sibling pairs."""
    out = []
    for s in sorted(set(stems)):
        if out and s.startswith(out[-1]):
            continue
        out.append(s)
    stack = []
    for s in out:
        while stack and s and len(stack[-1]) == len(s) and stack[-1][:-1] == s[:-1] \
                and stack[-1][-1] == "0" and s[-1] == "1":
            stack.pop()
            s = s[:-1]
        stack.append(s)
    return tuple(stack)


def meet(a, b):
    bset = set(b)
    out = []
    for s in a:
        if _has_prefix_in(s, bset):
            out.append(s)
        else:
            lo, hi = _range(b, s)
            out.extend(b[lo:hi])
    return tuple(out)


def _comp(a, exts):
    if not exts:
        return [a]
    if exts[0] == a:
        return []
    k = len(a)
    e0 = [e for e in exts if e[k] == "0"]
    e1 = [e for e in exts if e[k] == "1"]
    return _comp(a + "0", e0) + _comp(a + "1", e1)


def diff(a, b):
    bset = set(b)
    out = []
    for s in a:
        if _has_prefix_in(s, bset):
            continue
        lo, hi = _range(b, s)
        if lo == hi:
            out.append(s)
        else:
            out.extend(_comp(s, list(b[lo:hi])))
    return tuple(out)


def disjoint(a, b):
    bset = set(b)
    for s in a:
        if _has_prefix_in(s, bset):
            return False
        lo, hi = _range(b, s)
        if lo != hi:
            return False
    return True


def contains_node(stems, t):
    if _has_prefix_in(t, set(stems)):
        return True
    lo, hi = _range(stems, t)
    return lo != hi


def truncate(stems, m):
    return canon(s[:m] for s in stems)


def slice_count(stems, m):
    total = 0
    seen = set()
    for s in stems:
        if len(s) <= m:
            total += 1 << (m - len(s))
        else:
            seen.add(s[:m])
    return total + len(seen)


def level_nodes(stems, m):
    out = []
    last = None
    for s in stems:
        if len(s) <= m:
            for tail in product("01", repeat=m - len(s)):
                out.append(s + "".join(tail))
        else:
            p = s[:m]
            if p != last:
                out.append(p)
                last = p
    return out
