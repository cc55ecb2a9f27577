"""Truncated cavity-plus-two-atom Hilbert space and its dense operator algebra.

Basis ordering contract, relied on by every downstream module (vectorized
superoperators, photon marginals, serialized output):

    basis index = fock * 4 + atom1 * 2 + atom2

with atom bit 0 = |g> and 1 = |e>.  Index 0 is the cavity vacuum with both
atoms in the ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HERMITICITY_TOL",
    "TRACE_TOL",
    "POSITIVITY_TOL",
    "HilbertSpace",
    "Operator",
    "DensityMatrix",
    "make_space",
    "basis_index",
    "ket",
    "pure_state",
    "identity",
    "annihilation",
    "creation",
    "number_operator",
    "sigma_minus",
    "sigma_plus",
    "expectation",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8

# Single-atom lowering operator in the (|g>, |e>) ordering.
_SIGMA_MINUS_1ATOM = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class HilbertSpace:
    """Cavity Fock levels 0..n_max tensored with two two-level atoms."""

    n_max: int
    n_atoms: int = 2

    def __post_init__(self):
        if isinstance(self.n_max, bool) or not isinstance(self.n_max, (int, np.integer)):
            raise ValueError(f"n_max must be an integer, got {self.n_max!r}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if self.n_atoms != 2:
            raise ValueError("only the two-atom geometry is supported")

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * 2**self.n_atoms


def make_space(n_max: int) -> HilbertSpace:
    """Build the composite space with Fock truncation ``n_max``."""
    return HilbertSpace(int(n_max) if not isinstance(n_max, bool) else n_max)


def basis_index(space: HilbertSpace, fock: int, atom1: int, atom2: int) -> int:
    """Index of the product basis state |fock; atom1, atom2> (bits 0=g, 1=e)."""
    if not 0 <= fock <= space.n_max:
        raise ValueError(f"fock level {fock} outside 0..{space.n_max}")
    if atom1 not in (0, 1) or atom2 not in (0, 1):
        raise ValueError(f"atom bits must be 0 (g) or 1 (e), got {atom1}, {atom2}")
    return fock * 4 + atom1 * 2 + atom2


def ket(space: HilbertSpace, fock: int, atom1: int, atom2: int) -> np.ndarray:
    """Unit column vector for a product basis state."""
    vec = np.zeros(space.dim, dtype=complex)
    vec[basis_index(space, fock, atom1, atom2)] = 1.0
    return vec


class Operator:
    """Complex matrix acting on a fixed :class:`HilbertSpace`.

    Thin wrapper over a dense complex array; mixing operators that live on
    different spaces is rejected.  Instances are treated as immutable.
    """

    __slots__ = ("space", "mat")

    def __init__(self, space: HilbertSpace, mat) -> None:
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (space.dim, space.dim):
            raise ValueError(
                f"operator must be {space.dim}x{space.dim} for this space, got {mat.shape}"
            )
        self.space = space
        self.mat = mat

    def dag(self) -> "Operator":
        """Adjoint (conjugate transpose)."""
        return Operator(self.space, self.mat.conj().T)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.abs(self.mat - self.mat.conj().T).max() <= tol)

    def _require_same_space(self, other: "Operator") -> None:
        if self.space != other.space:
            raise ValueError("operators live on different Hilbert spaces")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.mat @ other.mat)

    def __add__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.mat + other.mat)

    def __sub__(self, other: "Operator") -> "Operator":
        self._require_same_space(other)
        return Operator(self.space, self.mat - other.mat)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.mat * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.mat)

    def __repr__(self) -> str:
        return f"Operator(dim={self.space.dim}, n_max={self.space.n_max})"


class DensityMatrix:
    """Hermitian state on a :class:`HilbertSpace`.

    ``normalized=True`` (the default) additionally requires unit trace.
    Detection-conditioned states are carried around unnormalized with
    ``normalized=False``; their trace is the detection probability weight.
    Positivity is not checked at construction (integrator round-off makes
    it a tolerance statement); use :meth:`check_positive`.
    """

    __slots__ = ("space", "mat", "normalized")

    def __init__(self, space: HilbertSpace, mat, normalized: bool = True) -> None:
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (space.dim, space.dim):
            raise ValueError(
                f"density matrix must be {space.dim}x{space.dim} for this space, got {mat.shape}"
            )
        defect = np.abs(mat - mat.conj().T).max()
        if defect > HERMITICITY_TOL:
            raise ValueError(f"density matrix is not Hermitian (max defect {defect:.3e})")
        if normalized:
            tr = mat.trace()
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"trace must be 1 within {TRACE_TOL:.0e}, got {tr:.12g}")
        self.space = space
        self.mat = mat
        self.normalized = normalized

    @property
    def trace(self) -> float:
        return float(self.mat.trace().real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.mat)[0])

    def check_positive(self, tol: float = POSITIVITY_TOL) -> float:
        """Raise if any eigenvalue is below ``-tol``; return the smallest one."""
        low = self.min_eigenvalue()
        if low < -tol:
            raise ValueError(f"state has negative eigenvalue {low:.3e} (tolerance -{tol:.0e})")
        return low

    def __repr__(self) -> str:
        return (
            f"DensityMatrix(dim={self.space.dim}, trace={self.trace:.6g}, "
            f"normalized={self.normalized})"
        )


def pure_state(space: HilbertSpace, fock: int, atom1: int, atom2: int) -> DensityMatrix:
    """Projector onto a product basis state."""
    vec = ket(space, fock, atom1, atom2)
    return DensityMatrix(space, np.outer(vec, vec.conj()))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def annihilation(space: HilbertSpace) -> Operator:
    """Cavity annihilation: a|n> = sqrt(n)|n-1>, identity on both atoms."""
    fock = np.diag(np.sqrt(np.arange(1, space.n_max + 1)), 1)
    return Operator(space, np.kron(fock, np.eye(4)))


def creation(space: HilbertSpace) -> Operator:
    return annihilation(space).dag()


def number_operator(space: HilbertSpace) -> Operator:
    a = annihilation(space)
    return a.dag() @ a


def sigma_minus(space: HilbertSpace, j: int) -> Operator:
    """Lowering operator |g><e| of atom ``j`` (1 or 2), identity elsewhere."""
    if j not in (1, 2):
        raise ValueError(f"atom index must be 1 or 2, got {j!r}")
    if j == 1:
        pair = np.kron(_SIGMA_MINUS_1ATOM, np.eye(2))
    else:
        pair = np.kron(np.eye(2), _SIGMA_MINUS_1ATOM)
    return Operator(space, np.kron(np.eye(space.n_max + 1), pair))


def sigma_plus(space: HilbertSpace, j: int) -> Operator:
    return sigma_minus(space, j).dag()


def expectation(op: Operator, rho: DensityMatrix) -> complex:
    """tr(A rho).

    For a Hermitian operator the result must be real; a residual imaginary
    part above tolerance signals a corrupted state and raises.
    """
    if op.space != rho.space:
        raise ValueError("operator and state live on different Hilbert spaces")
    value = complex(np.einsum("ij,ji->", op.mat, rho.mat))
    if op.is_hermitian() and abs(value.imag) > HERMITICITY_TOL:
        raise ArithmeticError(
            f"expectation of Hermitian operator has imaginary part {value.imag:.3e}"
        )
    return value
