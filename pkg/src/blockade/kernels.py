"""Backend selection for the RK4 propagation kernel.

The compiled extension is preferred when importable; otherwise the
pure-Python kernel is used.  Both expose the same ``rk4_csr`` contract.
"""

from . import _pykernel

try:
    from . import _cykernel

    _IMPLS = {"cython": _cykernel, "python": _pykernel}
    DEFAULT_BACKEND = "cython"
except ImportError:  # extension not built
    _IMPLS = {"python": _pykernel}
    DEFAULT_BACKEND = "python"

__all__ = ["rk4_csr", "available_backends", "DEFAULT_BACKEND"]


def available_backends() -> tuple:
    return tuple(sorted(_IMPLS))


def rk4_csr(indptr, indices, data, y0, h, n_sub, n_out, backend: str | None = None):
    """Dispatch to the selected (default: fastest available) RK4 kernel."""
    name = backend or DEFAULT_BACKEND
    try:
        impl = _IMPLS[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {available_backends()}"
        ) from None
    return impl.rk4_csr(indptr, indices, data, y0, h, n_sub, n_out)
