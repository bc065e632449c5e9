"""Hot-kernel backend selection.

At import time the compiled extension is preferred; the numpy reference
implementation is used when the extension is unavailable or when
``ENGAGEDYN_BACKEND=pure`` is set. ``BACKEND`` records the choice.
"""

import os

from . import pure

BACKEND = "pure"
gompertz_curve = pure.gompertz_curve
gompertz_curve_jac = pure.gompertz_curve_jac
lasso_cd = pure.lasso_cd

if os.environ.get("ENGAGEDYN_BACKEND", "").strip().lower() != "pure":
    try:
        from . import _native
    except ImportError:
        _native = None
    if _native is not None:
        BACKEND = "native"
        gompertz_curve = _native.gompertz_curve
        gompertz_curve_jac = _native.gompertz_curve_jac
        lasso_cd = _native.lasso_cd


def native_available():
    """True when the compiled extension imported successfully."""
    try:
        from . import _native  # noqa: F401
    except ImportError:
        return False
    return True
