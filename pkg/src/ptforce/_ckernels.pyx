# cython: language_level=3, boundscheck=False, wraparound=True
"""Compiled stem-set kernels; same contract as _kernels_py."""
from bisect import bisect_left


cdef inline bint _has_prefix_in(str s, set sset):
    cdef Py_ssize_t i, n = len(s)
    for i in range(n + 1):
        if s[:i] in sset:
            return True
    return False


cdef inline tuple _range(tuple stems, str p):
    return bisect_left(stems, p), bisect_left(stems, p + "2")


def canon(stems):
    cdef list out = []
    cdef list stack = []
    cdef str s, top
    for s in sorted(set(stems)):
        if out and s.startswith(<str>out[-1]):
            continue
        out.append(s)
    for s in out:
        while stack and len(s) > 0:
            top = <str>stack[-1]
            if len(top) == len(s) and top[len(top) - 1] == "0" and s[len(s) - 1] == "1" \
                    and top[:len(top) - 1] == s[:len(s) - 1]:
                stack.pop()
                s = s[:len(s) - 1]
            else:
                break
        stack.append(s)
    return tuple(stack)


def meet(tuple a, tuple b):
    cdef set bset = set(b)
    cdef list out = []
    cdef str s
    cdef Py_ssize_t lo, hi
    for s in a:
        if _has_prefix_in(s, bset):
            out.append(s)
        else:
            lo = bisect_left(b, s)
            hi = bisect_left(b, s + "2")
            if lo != hi:
                out.extend(b[lo:hi])
    return tuple(out)


cdef list _comp(str a, list exts):
    if not exts:
        return [a]
    if exts[0] == a:
        return []
    cdef Py_ssize_t k = len(a)
    cdef list e0 = []
    cdef list e1 = []
    cdef str e
    for e in exts:
        if e[k] == "0":
            e0.append(e)
        else:
            e1.append(e)
    return _comp(a + "0", e0) + _comp(a + "1", e1)


def diff(tuple a, tuple b):
    cdef set bset = set(b)
    cdef list out = []
    cdef str s
    cdef Py_ssize_t lo, hi
    for s in a:
        if _has_prefix_in(s, bset):
            continue
        lo = bisect_left(b, s)
        hi = bisect_left(b, s + "2")
        if lo == hi:
            out.append(s)
        else:
            out.extend(_comp(s, list(b[lo:hi])))
    return tuple(out)


def disjoint(tuple a, tuple b):
    cdef set bset = set(b)
    cdef str s
    for s in a:
        if _has_prefix_in(s, bset):
            return False
        if bisect_left(b, s) != bisect_left(b, s + "2"):
            return False
    return True


def contains_node(tuple stems, str t):
    if _has_prefix_in(t, set(stems)):
        return True
    return bisect_left(stems, t) != bisect_left(stems, t + "2")


def truncate(tuple stems, Py_ssize_t m):
    return canon([s[:m] for s in stems])


def slice_count(tuple stems, Py_ssize_t m):
    cdef object total = 0
    cdef set seen = set()
    cdef str s
    for s in stems:
        if len(s) <= m:
            total += (<object>1) << (m - len(s))
        else:
            seen.add(s[:m])
    return total + len(seen)


def level_nodes(tuple stems, Py_ssize_t m):
    cdef list out = []
    cdef list tails
    cdef dict cache = {}
    cdef str s, p, t
    cdef object last = None
    cdef Py_ssize_t r, i
    for s in stems:
        if len(s) <= m:
            r = m - len(s)
            tails = cache.get(r)
            if tails is None:
                # all bit strings of length r, in lexicographic order
                tails = [""]
                for i in range(r):
                    tails = [t + b for t in tails for b in "01"]
                cache[r] = tails
            out.extend([s + t for t in tails])
        else:
            p = s[:m]
            if p != last:
                out.append(p)
                last = p
    return out
