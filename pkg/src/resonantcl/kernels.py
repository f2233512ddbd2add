"""Selects the compiled step kernel when available, else the numpy fallback.

Set ``RESONANTCL_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

from ._step_py import llf_step as llf_step_py
from ._step_py import llf_step_generic

__all__ = ["llf_step", "llf_step_py", "llf_step_generic", "HAVE_COMPILED", "BACKEND"]

llf_step_compiled = None
if os.environ.get("RESONANTCL_PURE", "") not in ("1", "true", "yes"):
    try:
        from ._step import llf_step as llf_step_compiled
    except ImportError:  # extension not built
        llf_step_compiled = None

HAVE_COMPILED = llf_step_compiled is not None
BACKEND = "compiled" if HAVE_COMPILED else "python"
llf_step = llf_step_compiled if HAVE_COMPILED else llf_step_py
