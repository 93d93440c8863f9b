"""Kernel selection: compiled extension when importable, else pure Python.

Set PTFORCE_PURE=1 to force the fallback.
"""
import os

from . import _kernels_py as py_kernels

if os.environ.get("PTFORCE_PURE"):
    _impl = py_kernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = py_kernels
        BACKEND = "python"

canon = _impl.canon
meet = _impl.meet
diff = _impl.diff
disjoint = _impl.disjoint
contains_node = _impl.contains_node
truncate = _impl.truncate
slice_count = _impl.slice_count
level_nodes = _impl.level_nodes
