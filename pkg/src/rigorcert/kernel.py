"""Select the compiled kernel when available, else the pure-Python one.

Set ``RIGOR_PURE_PYTHON=1`` to force the fallback.  Both modules expose the
same functions and produce identical results.
"""
import os

if os.environ.get("RIGOR_PURE_PYTHON"):
    from . import _pykernel as _impl
else:
    try:
        from . import _ckernel as _impl
    except ImportError:
        from . import _pykernel as _impl

BACKEND = "cython" if _impl.__name__.endswith("_ckernel") else "python"

OP_CONST = _impl.OP_CONST
OP_ADD = _impl.OP_ADD
OP_SUB = _impl.OP_SUB
OP_MUL = _impl.OP_MUL
OP_DIV = _impl.OP_DIV
OP_NEG = _impl.OP_NEG
OP_POW = _impl.OP_POW
OP_ABS = _impl.OP_ABS
OP_CALL = _impl.OP_CALL

iadd = _impl.iadd
isub = _impl.isub
ineg = _impl.ineg
imul = _impl.imul
idiv = _impl.idiv
ipow = _impl.ipow
iabs = _impl.iabs
run_tape = _impl.run_tape
atan_series = _impl.atan_series
artanh_series = _impl.artanh_series
sin_series = _impl.sin_series
cos_series = _impl.cos_series
atn_series = _impl.atn_series
