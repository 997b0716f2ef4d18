"""Select the kernel implementation at import time.

The compiled ``_kernels`` extension is preferred; ``_kernels_py`` is used
when it is missing or when ``CORRSOP_PURE_PYTHON=1`` is set.
"""
import os

if os.environ.get("CORRSOP_PURE_PYTHON", "") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND
marcum_qp = kernels.marcum_qp
count_outages = kernels.count_outages
