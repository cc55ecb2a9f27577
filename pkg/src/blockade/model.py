"""Driven two-atom cavity model: Hamiltonian and Lindblad generator.

All rates and frequencies are in units of the cavity linewidth kappa, which
is pinned to 1.  The dissipator normalization is (2 C rho C+ - C+C rho -
rho C+C) per channel, i.e. without the 1/2 prefactor, so the bare-cavity
photon number decays at rate 2*kappa.  The superoperator acts on
column-stacked density matrices: vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sparse

from .hilbert import HilbertSpace, Operator, annihilation, sigma_minus

__all__ = [
    "SystemParams",
    "Liouvillian",
    "build_hamiltonian",
    "build_liouvillian",
    "vectorize",
    "unvectorize",
]


@dataclass(frozen=True)
class SystemParams:
    """Model rates and detunings, all in units of kappa.

    ``phi_z`` is the relative radiation phase of the second atom; the two
    cavity couplings are g1 = g and g2 = g*cos(phi_z).  ``delta_a`` and
    ``delta_cav`` are the drive-minus-atom and drive-minus-cavity detunings.
    """

    g: float
    phi_z: float = 0.0
    eta: float = 0.0
    delta_a: float = 0.0
    delta_cav: float = 0.0
    gamma: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        for name in ("g", "eta", "gamma"):
            value = getattr(self, name)
            if not value >= 0:  # also rejects NaN
                raise ValueError(f"{name} must be >= 0, got {value!r}")
        if self.kappa != 1.0:
            raise ValueError("kappa is the unit of time/frequency and must equal 1")

    @property
    def g1(self) -> float:
        return self.g

    @property
    def g2(self) -> float:
        return self.g * math.cos(self.phi_z)

    def at_detuning(self, delta: float) -> "SystemParams":
        """Copy with both detunings set to the same value (common-scan shortcut)."""
        return replace(self, delta_a=float(delta), delta_cav=float(delta))


def build_hamiltonian(space: HilbertSpace, p: SystemParams) -> Operator:
    """Rotating-frame Hamiltonian: detunings, direct drive on both atoms,
    and the two cavity couplings g1, g2."""
    a = annihilation(space)
    ad = a.dag()
    h = p.delta_cav * (ad.mat @ a.mat)
    for j, gj in ((1, p.g1), (2, p.g2)):
        sm = sigma_minus(space, j).mat
        sp = sm.conj().T
        h = h + p.delta_a * (sp @ sm)
        h = h + p.eta * (sp + sm)
        h = h + gj * (a.mat @ sp + ad.mat @ sm)
    return Operator(space, h)


@dataclass(eq=False)
class Liouvillian:
    """Lindblad generator as a sparse matrix on column-stacked states."""

    space: HilbertSpace
    matrix: sparse.csr_matrix

    def apply(self, rho_mat: np.ndarray) -> np.ndarray:
        """Generator applied to a state given in matrix form."""
        d = self.space.dim
        return unvectorize(self.matrix @ vectorize(rho_mat), d)


def build_liouvillian(hamiltonian: Operator, p: SystemParams) -> Liouvillian:
    """Assemble -i[H, .] plus cavity and atomic decay channels."""
    if not hamiltonian.is_hermitian():
        raise ValueError("Hamiltonian must be Hermitian")
    space = hamiltonian.space
    eye = sparse.identity(space.dim, dtype=complex, format="csr")

    def spre(m):
        return sparse.kron(eye, sparse.csr_matrix(m), format="csr")

    def spost(m):
        return sparse.kron(sparse.csr_matrix(m).T, eye, format="csr")

    def decay_channel(c):
        # 2 C rho C+ - C+C rho - rho C+C
        cs = sparse.csr_matrix(c)
        cdc = (cs.conj().T @ cs).tocsr()
        return 2.0 * sparse.kron(cs.conj(), cs, format="csr") - spre(cdc) - spost(cdc)

    h = hamiltonian.mat
    mat = -1j * (spre(h) - spost(h))
    mat = mat + p.kappa * decay_channel(annihilation(space).mat)
    for j in (1, 2):
        mat = mat + p.gamma * decay_channel(sigma_minus(space, j).mat)

    mat = sparse.csr_matrix(mat)
    mat.eliminate_zeros()
    mat.sort_indices()
    return Liouvillian(space=space, matrix=mat)


def vectorize(mat: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(mat, dtype=complex).flatten(order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    return np.asarray(vec, dtype=complex).reshape((dim, dim), order="F")
