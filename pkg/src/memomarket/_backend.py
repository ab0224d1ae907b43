"""Hot-kernel backend selection.

The compiled extension ``memomarket._core`` is preferred when it imports;
otherwise the numpy reference implementations in ``memomarket._pure`` take
over.  Setting the environment variable MEMOMARKET_PURE=1 before import
forces the fallback, which is how the benchmark and the equivalence tests
pin each side down.
"""

from __future__ import annotations

import os

from . import _pure

_impl = _pure
if not os.environ.get("MEMOMARKET_PURE"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure


def backend_name() -> str:
    return _impl.BACKEND_NAME


y_fast_increments = _impl.y_fast_increments
first_violation_recursive = _impl.first_violation_recursive
first_violation_table = _impl.first_violation_table
exact_pn_dfs = _impl.exact_pn_dfs
