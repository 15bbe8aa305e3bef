"""Select the compiled kernels when available, else the pure-Python ones.

Set ``DEEPHOLE_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("DEEPHOLE_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import shell_excess, shell_norms

    BACKEND = "python"
else:
    try:
        from ._kernels import shell_excess, shell_norms

        BACKEND = "cython"
    except ImportError:
        from ._pykernels import shell_excess, shell_norms

        BACKEND = "python"

__all__ = ["BACKEND", "shell_excess", "shell_norms"]
