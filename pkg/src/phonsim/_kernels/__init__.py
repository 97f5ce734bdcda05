"""Stepping kernels: compiled extension when available, numpy fallback otherwise."""

try:
    from ._stepper_cy import step_propagate

    BACKEND = "cython"
except ImportError:  # extension not built on this install
    from ._stepper_py import step_propagate

    BACKEND = "python"

from . import _stepper_py


def get_backend(name: str):
    """Fetch a specific backend's ``step_propagate`` (for tests/benchmarks)."""
    if name == "python":
        return _stepper_py.step_propagate
    if name == "cython":
        from . import _stepper_cy

        return _stepper_cy.step_propagate
    raise ValueError(f"unknown backend {name!r}")


__all__ = ["step_propagate", "BACKEND", "get_backend"]
