"""Kernel backend selection.

The compiled extension is used when it imports; set ``DPENSEMBLE_PURE_PYTHON=1``
to force the pure-Python implementation.
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("DPENSEMBLE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

OK, STEP_COLLAPSE, MAX_STEPS = 0, 1, 2

sample_counts = _active.sample_counts
dp45_linear = _active.dp45_linear
uniform = _active.uniform
binomial_inverse = _active.binomial_inverse
poisson_inverse = _active.poisson_inverse
