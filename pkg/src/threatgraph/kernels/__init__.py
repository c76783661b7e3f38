"""Hot-loop kernels with a compiled fast path.

Importing this package selects the compiled extension when it was built and
falls back to the pure-Python implementations otherwise. IMPLEMENTATION
reports which one is active.
"""

try:
    from . import _speedups as _impl

    IMPLEMENTATION = "compiled"
except ImportError:  # extension not built
    from . import fallback as _impl

    IMPLEMENTATION = "python"

best_gini_split = _impl.best_gini_split
logistic_sgd_epochs = _impl.logistic_sgd_epochs
hinge_sgd_epochs = _impl.hinge_sgd_epochs

__all__ = [
    "IMPLEMENTATION",
    "best_gini_split",
    "logistic_sgd_epochs",
    "hinge_sgd_epochs",
]
