"""Weak-drive manifold blocks in the collective atomic basis.

Within the n-photon manifold the coupled Hamiltonian restricted to the
collective basis (|gg,n>, |+,n-1>, |-,n-1>, |ee,n-2>), with
|+-> = (|eg> +- |ge>)/sqrt(2), is a small real symmetric block: for
in-phase coupling (phi_z = 0) the cavity ladder runs through |+> and |->
is dark; for out-of-phase coupling (phi_z = pi) the roles swap.  The
one-photon block is 3x3 because |ee,n-2> does not exist there.

These blocks provide exact reference energies for the full model and the
analytic oscillation frequencies of the delayed correlation functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemParams

__all__ = [
    "COLLECTIVE_BASIS",
    "CollectiveBlock",
    "DressedLevel",
    "build_block",
    "eigensystem",
    "predicted_frequencies",
]

COLLECTIVE_BASIS = ("gg,n", "+,n-1", "-,n-1", "ee,n-2")

_PHASE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CollectiveBlock:
    """Symmetric coupling block of one photon-space manifold."""

    n: int
    phi_z: float
    g: float
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class DressedLevel:
    """One eigenstate of a manifold block; energy in units of g."""

    n: int
    energy_over_g: float
    amplitudes: np.ndarray


def _bright_index(phi_z: float) -> int:
    """Collective-basis row the cavity couples to: |+> in phase, |-> out of phase."""
    if abs(phi_z) <= _PHASE_TOL:
        return 1
    if abs(phi_z - math.pi) <= _PHASE_TOL:
        return 2
    raise ValueError(
        f"phi_z must be 0 or pi for collective-basis blocks, got {phi_z!r}; "
        "general phases require the full model"
    )


def build_block(n: int, phi_z: float, g: float) -> CollectiveBlock:
    """Coupling block of the n-photon manifold (n >= 1).

    Couplings are sqrt(2n)*g between |gg,n> and the bright collective state
    and sqrt(2(n-1))*g between the bright state and |ee,n-2>; the other
    collective state stays dark.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValueError(f"photon-space index must be an integer, got {n!r}")
    if n < 1:
        raise ValueError(f"photon-space index must be >= 1, got {n}")
    if not g >= 0:
        raise ValueError(f"coupling strength must be >= 0, got {g!r}")
    bright = _bright_index(phi_z)
    size = 3 if n == 1 else 4
    mat = np.zeros((size, size))
    mat[0, bright] = mat[bright, 0] = math.sqrt(2 * n) * g
    if n >= 2:
        mat[bright, 3] = mat[3, bright] = math.sqrt(2 * (n - 1)) * g
    return CollectiveBlock(n=int(n), phi_z=float(phi_z), g=float(g), matrix=mat)


def eigensystem(block: CollectiveBlock) -> list[DressedLevel]:
    """Eigenlevels of a manifold block, energies ascending.

    Sign convention: the |gg,n> amplitude is made non-negative; for dark
    states with no |gg,n> weight the largest-magnitude amplitude is made
    positive instead.
    """
    values, vectors = np.linalg.eigh(block.matrix)
    scale = block.g if block.g > 0 else 1.0
    levels = []
    for k in range(values.size):
        vec = vectors[:, k].copy()
        pivot = 0 if abs(vec[0]) > 1e-12 else int(np.argmax(np.abs(vec)))
        if vec[pivot] < 0:
            vec = -vec
        levels.append(
            DressedLevel(n=block.n, energy_over_g=float(values[k] / scale), amplitudes=vec)
        )
    return levels


def predicted_frequencies(p: SystemParams, scenario: str) -> dict:
    """Analytic oscillation frequencies of the delayed correlations (units of kappa).

    fast           2*sqrt(2)*g, photon exchange between |gg,1> and the bright
                   one-photon collective state;
    slow_in_phase  sqrt(4*eta^2 + gap^2) with gap = (sqrt(2)-sqrt(6)/2)*g, the
                   drive cycling between the ground state and the bright state
                   at the pair-resonance detuning;
    slow_out_phase sqrt(4*(sqrt(2)*eta)^2 + delta_a^2), the drive cycling
                   between the ground state and the dark one-photon state.

    ``scenario`` in {'in_phase', 'out_phase'} selects which slow frequency is
    aliased under the 'slow' key.  Periods 2*pi/f are included per entry.
    """
    if scenario not in ("in_phase", "out_phase"):
        raise ValueError(f"scenario must be 'in_phase' or 'out_phase', got {scenario!r}")
    gap = (math.sqrt(2.0) - math.sqrt(6.0) / 2.0) * p.g
    freqs = {
        "fast": 2.0 * math.sqrt(2.0) * p.g,
        "slow_in_phase": math.sqrt(4.0 * p.eta**2 + gap**2),
        "slow_out_phase": math.sqrt(4.0 * (math.sqrt(2.0) * p.eta) ** 2 + p.delta_a**2),
    }
    freqs["slow"] = freqs["slow_in_phase" if scenario == "in_phase" else "slow_out_phase"]
    for name in list(freqs):
        value = freqs[name]
        freqs[f"period_{name}"] = 2.0 * math.pi / value if value > 0 else math.inf
    return freqs
