"""Stationary states and time propagation of the Lindblad generator.

These are the two numerical kernels behind every observable: a direct
sparse solve for the stationary state and a fixed-step RK4 propagator whose
internal step resolves the fastest atom-cavity oscillation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from . import kernels
from .errors import (
    AmbiguousSteadyStateError,
    IntegrationError,
    NoDetectablePhotonsError,
    SteadyStateConvergenceError,
)
from .hilbert import (
    HERMITICITY_TOL,
    POSITIVITY_TOL,
    TRACE_TOL,
    DensityMatrix,
    Operator,
)
from .model import Liouvillian, unvectorize, vectorize

__all__ = [
    "STEADY_STATE_RESIDUAL_TOL",
    "PropagationSpec",
    "PropagationResult",
    "rk4_max_step",
    "steady_state",
    "steady_state_residual",
    "propagate",
    "conditional_state",
]

STEADY_STATE_RESIDUAL_TOL = 1e-10
_DETECTION_NORM_FLOOR = 1e-14
_ZERO_MODE_TOL = 1e-8


def rk4_max_step(g: float) -> float:
    """Largest allowed internal RK4 step for coupling strength ``g``.

    The fastest coherent oscillation runs at angular frequency 2*sqrt(2)*g;
    capping the step at 0.02 of its inverse resolves one period with ~314
    steps, comfortably inside the stability and accuracy region of RK4.
    """
    if g <= 0:
        return math.inf
    return 0.02 / (2.0 * math.sqrt(2.0) * g)


@dataclass(frozen=True)
class PropagationSpec:
    """How to sample a trajectory: total time, output spacing, integrator.

    ``max_step`` bounds the internal step of the fixed-step integrator (and
    is passed through to the adaptive one); build specs for a concrete
    coupling strength with :meth:`for_coupling` so the bound tracks the
    fastest oscillation in the problem.
    """

    t_max: float
    dt_out: float
    method: str = "fixed_rk4"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float | None = None

    def __post_init__(self):
        if not self.dt_out > 0:
            raise ValueError(f"dt_out must be > 0, got {self.dt_out!r}")
        if not self.t_max >= self.dt_out:
            raise ValueError(f"t_max must be >= dt_out, got {self.t_max!r}")
        if self.method not in ("fixed_rk4", "adaptive"):
            raise ValueError(f"method must be 'fixed_rk4' or 'adaptive', got {self.method!r}")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError(f"max_step must be > 0, got {self.max_step!r}")

    @classmethod
    def for_coupling(cls, g: float, t_max: float, dt_out: float, **kwargs) -> "PropagationSpec":
        """Spec whose internal step resolves the fastest oscillation at coupling g."""
        step = rk4_max_step(g)
        return cls(t_max=t_max, dt_out=dt_out, max_step=None if math.isinf(step) else step, **kwargs)


@dataclass(eq=False)
class PropagationResult:
    """Sampled trajectory: ``states[k]`` is the state at ``times[k]``."""

    times: np.ndarray
    states: list

    def expectation_series(self, op: Operator) -> np.ndarray:
        """tr(A rho(t)) at every sample, as a complex array."""
        stack = np.stack([state.mat for state in self.states])
        return np.einsum("ij,sji->s", op.mat, stack)


def steady_state_residual(lv: Liouvillian, rho: DensityMatrix) -> float:
    """Max-norm of the generator applied to a candidate stationary state."""
    return float(np.abs(lv.matrix @ vectorize(rho.mat)).max())


def steady_state(
    lv: Liouvillian, residual_tol: float = STEADY_STATE_RESIDUAL_TOL
) -> DensityMatrix:
    """Unique stationary state of the generator.

    Solves the linear system obtained by replacing the first row of
    L vec(rho) = 0 with the unit-trace constraint, then factorizes directly
    (the replaced row is one of the linearly dependent population rows, so
    no information is lost).  One step of iterative refinement keeps the
    residual at the direct-solve floor.

    Raises
    ------
    AmbiguousSteadyStateError
        If the generator has more than one zero mode.
    SteadyStateConvergenceError
        If the residual or positivity tolerance cannot be met.
    """
    dim = lv.space.dim
    size = dim * dim
    lin = lv.matrix.tolil(copy=True)
    trace_cols = (np.arange(dim) * (dim + 1)).tolist()
    lin.rows[0] = trace_cols
    lin.data[0] = [1.0 + 0.0j] * dim
    system = lin.tocsc()
    rhs = np.zeros(size, dtype=complex)
    rhs[0] = 1.0

    solution = None
    try:
        lu = spla.splu(system)
        solution = lu.solve(rhs)
        if np.all(np.isfinite(solution)):
            solution = solution + lu.solve(rhs - system @ solution)
        if not np.all(np.isfinite(solution)):
            solution = None
    except RuntimeError:  # singular factorization
        solution = None
    if solution is None:
        _raise_steady_state_failure(lv, None)

    rho = unvectorize(solution, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / rho.trace().real
    residual = float(np.abs(lv.matrix @ vectorize(rho)).max())
    if residual > residual_tol:
        _raise_steady_state_failure(lv, residual)

    state = DensityMatrix(lv.space, rho)
    low = state.min_eigenvalue()
    if low < -POSITIVITY_TOL:
        raise SteadyStateConvergenceError(
            f"stationary state has negative eigenvalue {low:.3e}"
        )
    return state


def _raise_steady_state_failure(lv: Liouvillian, residual):
    """Distinguish a degenerate stationary space from a plain solve failure."""
    zero_modes = _count_zero_modes(lv)
    if zero_modes >= 2:
        raise AmbiguousSteadyStateError(
            f"generator has {zero_modes} (near-)zero eigenvalues; "
            "the stationary state is not unique"
        )
    detail = "singular factorization" if residual is None else f"residual {residual:.3e}"
    raise SteadyStateConvergenceError(f"stationary-state solve failed: {detail}")


def _count_zero_modes(lv: Liouvillian) -> int:
    vals = spla.eigs(
        lv.matrix.tocsc(), k=2, sigma=1e-9, which="LM", return_eigenvectors=False
    )
    return int(np.sum(np.abs(vals) <= _ZERO_MODE_TOL))


def propagate(lv: Liouvillian, rho0: DensityMatrix, spec: PropagationSpec) -> PropagationResult:
    """Evolve a (possibly unnormalized) Hermitian state under the generator.

    Samples at t = 0, dt_out, 2*dt_out, ... up to t_max (the last multiple
    of dt_out not exceeding it).  The default integrator is fixed-step RK4
    run through the selected kernel backend; ``method='adaptive'`` switches
    to an embedded Runge-Kutta with the spec's tolerances.

    Raises
    ------
    IntegrationError
        On adaptive-step failure or broken trace/Hermiticity invariants.
    """
    if rho0.space != lv.space:
        raise ValueError("initial state and generator live on different spaces")
    dim = lv.space.dim
    y0 = vectorize(rho0.mat)
    n_out = int(math.floor(spec.t_max / spec.dt_out + 1e-9))
    times = np.arange(n_out + 1) * spec.dt_out

    if spec.method == "fixed_rk4":
        cap = spec.dt_out if spec.max_step is None else min(spec.dt_out, spec.max_step)
        n_sub = max(1, math.ceil(spec.dt_out / cap - 1e-12))
        h = spec.dt_out / n_sub
        m = lv.matrix
        snaps = kernels.rk4_csr(m.indptr, m.indices, m.data, y0, h, n_sub, n_out)
    else:
        matrix = lv.matrix
        sol = solve_ivp(
            lambda _t, y: matrix @ y,
            (0.0, float(times[-1])),
            y0,
            method="DOP853",
            t_eval=times,
            rtol=spec.rel_tol,
            atol=spec.abs_tol,
            max_step=spec.max_step if spec.max_step is not None else np.inf,
        )
        if not sol.success:
            raise IntegrationError(f"adaptive integration failed: {sol.message}")
        snaps = sol.y.T.astype(complex)

    # column-stacked vectors back to matrices
    stack = snaps.reshape(n_out + 1, dim, dim).transpose(0, 2, 1)
    herm_defect = np.abs(stack - stack.conj().transpose(0, 2, 1)).max()
    if herm_defect > HERMITICITY_TOL:
        raise IntegrationError(f"Hermiticity drift {herm_defect:.3e} during propagation")
    if rho0.normalized:
        traces = np.einsum("sii->s", stack).real
        drift = np.abs(traces - 1.0).max()
        if drift > TRACE_TOL:
            raise IntegrationError(f"trace drift {drift:.3e} during propagation")

    states = [
        DensityMatrix(lv.space, stack[k], normalized=rho0.normalized)
        for k in range(n_out + 1)
    ]
    return PropagationResult(times=times, states=states)


def conditional_state(
    rho_ss: DensityMatrix, jump: Operator, order: int
) -> tuple[DensityMatrix, float]:
    """Unnormalized post-detection state C rho C+ with C = jump**order.

    Returns the state together with its trace (the detection weight); the
    caller divides by the weight where a normalized state is needed.
    """
    if order not in (1, 2):
        raise ValueError(f"detection order must be 1 or 2, got {order!r}")
    if rho_ss.space != jump.space:
        raise ValueError("state and jump operator live on different spaces")
    c = jump.mat if order == 1 else jump.mat @ jump.mat
    projected = c @ rho_ss.mat @ c.conj().T
    weight = float(projected.trace().real)
    if weight < _DETECTION_NORM_FLOOR:
        raise NoDetectablePhotonsError(
            f"post-detection norm {weight:.3e} is below {_DETECTION_NORM_FLOOR:.0e}"
        )
    return DensityMatrix(rho_ss.space, projected, normalized=False), weight
