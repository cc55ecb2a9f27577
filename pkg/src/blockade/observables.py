"""Everything measured on the model: photon moments, zero-delay and delayed
correlation functions, photon-number statistics, and parameter sweeps.

Delayed correlations follow the regression route: condition the stationary
state on one (or two simultaneous) cavity detections, propagate the
unnormalized conditioned state under the same generator, and read off the
photon number along the way.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import poisson

from .errors import BlockadeError, UndefinedCorrelationError
from .hilbert import DensityMatrix, Operator, annihilation, expectation, make_space, number_operator
from .model import Liouvillian, SystemParams, build_hamiltonian, build_liouvillian
from .solvers import (
    PropagationSpec,
    conditional_state,
    propagate,
    steady_state,
    steady_state_residual,
)

__all__ = [
    "CorrelationSeries",
    "PhotonStatistics",
    "SweepResult",
    "g2_zero",
    "g3_zero",
    "g2_tau",
    "g3_tau",
    "photon_statistics",
    "spectrum_scan",
    "rabi_scan",
    "two_photon_resonance_detuning",
    "dominant_period",
    "modulation_period",
]

MEAN_PHOTON_FLOOR = 1e-12
POISSON_FLOOR = 1e-300
# Relative prominence below which a local maximum is treated as numerical
# ripple by the period extractors.
PEAK_PROMINENCE_FRAC = 1e-3
_TAU_ZERO_TOL = 1e-8


@dataclass(eq=False)
class CorrelationSeries:
    """Delayed correlation g^(order)(tau) on a uniform tau grid."""

    order: int
    tau_grid: np.ndarray
    values: np.ndarray


@dataclass(eq=False)
class PhotonStatistics:
    """Cavity photon-number marginal and its relative deviation from a
    Poisson distribution of equal mean (NaN where that reference underflows)."""

    mean_n: float
    p_n: np.ndarray
    poisson_p_n: np.ndarray
    deviation: np.ndarray


@dataclass(eq=False)
class SweepResult:
    """Steady-state observables over a one-parameter grid.

    ``errors`` lists (grid index, message) for points whose solve failed;
    their column entries are NaN.  ``residuals`` carries the stationary
    residual per point for run metadata.
    """

    swept_parameter: str
    grid: np.ndarray
    columns: dict
    errors: list
    residuals: np.ndarray


def two_photon_resonance_detuning(g: float) -> float:
    """Detuning at which two drive photons reach the second-manifold level."""
    return -np.sqrt(6.0) * g / 2.0


def _mean_photon(rho: DensityMatrix) -> float:
    return expectation(number_operator(rho.space), rho).real


def _require_photons(nbar: float) -> None:
    if nbar < MEAN_PHOTON_FLOOR:
        raise UndefinedCorrelationError(
            f"mean photon number {nbar:.3e} below {MEAN_PHOTON_FLOOR:.0e}; "
            "normalized correlations are undefined"
        )


def g2_zero(rho_ss: DensityMatrix) -> float:
    """Equal-time pair correlation <a+ a+ a a> / <a+ a>^2."""
    a = annihilation(rho_ss.space)
    nbar = _mean_photon(rho_ss)
    _require_photons(nbar)
    pairs = expectation(a.dag() @ a.dag() @ a @ a, rho_ss).real
    return float(pairs / nbar**2)


def g3_zero(rho_ss: DensityMatrix) -> float:
    """Equal-time triple correlation <a+ a+ a+ a a a> / <a+ a>^3."""
    if rho_ss.space.n_max < 3:
        raise ValueError("three-photon correlations require n_max >= 3")
    a = annihilation(rho_ss.space)
    nbar = _mean_photon(rho_ss)
    _require_photons(nbar)
    triples = expectation(a.dag() @ a.dag() @ a.dag() @ a @ a @ a, rho_ss).real
    return float(triples / nbar**3)


def _conditioned_photon_series(lv, rho_ss, spec, order):
    space = lv.space
    n_op = number_operator(space)
    nbar = expectation(n_op, rho_ss).real
    _require_photons(nbar)
    conditioned, _weight = conditional_state(rho_ss, annihilation(space), order)
    trajectory = propagate(lv, conditioned, spec)
    photon_number = trajectory.expectation_series(n_op).real
    return trajectory.times, photon_number, nbar


def g2_tau(lv: Liouvillian, rho_ss: DensityMatrix, spec: PropagationSpec) -> CorrelationSeries:
    """Delayed pair correlation g2(tau) via the regression route.

    One detection at tau=0 conditions the stationary state to a rho a+;
    propagating it and recording <a+ a>(tau) / <a+ a>_ss^2 gives the series.
    """
    taus, photon_number, nbar = _conditioned_photon_series(lv, rho_ss, spec, order=1)
    values = photon_number / nbar**2
    _check_tau_zero(values[0], g2_zero(rho_ss), order=2)
    return CorrelationSeries(order=2, tau_grid=taus, values=values)


def g3_tau(lv: Liouvillian, rho_ss: DensityMatrix, spec: PropagationSpec) -> CorrelationSeries:
    """Delayed triple correlation with two detections at tau=0 and one at tau."""
    if lv.space.n_max < 3:
        raise ValueError("three-photon correlations require n_max >= 3")
    taus, photon_number, nbar = _conditioned_photon_series(lv, rho_ss, spec, order=2)
    values = photon_number / nbar**3
    _check_tau_zero(values[0], g3_zero(rho_ss), order=3)
    return CorrelationSeries(order=3, tau_grid=taus, values=values)


def _check_tau_zero(series_head: float, direct: float, order: int) -> None:
    if abs(series_head - direct) > _TAU_ZERO_TOL * max(1.0, abs(direct)):
        raise ArithmeticError(
            f"g{order}(tau=0) = {series_head:.12g} disagrees with the direct "
            f"moment formula {direct:.12g}"
        )


def photon_statistics(rho: DensityMatrix) -> PhotonStatistics:
    """Photon-number marginal, its mean, and relative Poisson deviations."""
    n_levels = rho.space.n_max + 1
    populations = rho.mat.diagonal().real.reshape(n_levels, 4).sum(axis=1)
    mean_n = float(np.arange(n_levels) @ populations)
    reference = poisson.pmf(np.arange(n_levels), mean_n)
    defined = reference >= POISSON_FLOOR
    deviation = np.full(n_levels, np.nan)
    deviation[defined] = (populations[defined] - reference[defined]) / reference[defined]
    return PhotonStatistics(
        mean_n=mean_n, p_n=populations, poisson_p_n=reference, deviation=deviation
    )


# ---------------------------------------------------------------------------
# steady-state parameter sweeps


def _steady_point(params: SystemParams, n_max: int, with_correlations: bool) -> dict:
    space = make_space(n_max)
    lv = build_liouvillian(build_hamiltonian(space, params), params)
    rho = steady_state(lv)
    point = {
        "mean_n": _mean_photon(rho),
        "residual": steady_state_residual(lv, rho),
    }
    if with_correlations:
        point["g2_0"] = g2_zero(rho)
        point["g3_0"] = g3_zero(rho)
    return point


def _scan_worker(job):
    params, n_max, with_correlations = job
    try:
        return "ok", _steady_point(params, n_max, with_correlations)
    except (BlockadeError, ValueError, ArithmeticError) as exc:
        return "error", f"{type(exc).__name__}: {exc}"


def _run_scan(jobs, workers):
    if workers > 1:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_worker, jobs, chunksize=chunk))
    return [_scan_worker(job) for job in jobs]


def _collect(results, grid, names, swept):
    columns = {name: np.full(len(grid), np.nan) for name in names}
    residuals = np.full(len(grid), np.nan)
    errors = []
    for k, (status, payload) in enumerate(results):
        if status == "ok":
            for name in names:
                columns[name][k] = payload[name]
            residuals[k] = payload["residual"]
        else:
            errors.append((k, payload))
    return SweepResult(
        swept_parameter=swept, grid=np.asarray(grid, dtype=float),
        columns=columns, errors=errors, residuals=residuals,
    )


def spectrum_scan(
    base: SystemParams, delta_grid, n_max: int = 8, workers: int = 1
) -> SweepResult:
    """Steady-state mean photon number versus common detuning.

    Each grid point sets delta_a = delta_cav = delta (in units of kappa) on
    top of ``base``.  Failed points are recorded and the scan continues.
    """
    grid = np.atleast_1d(np.asarray(delta_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("delta grid must be nonempty")
    jobs = [(base.at_detuning(delta), n_max, False) for delta in grid]
    return _collect(_run_scan(jobs, workers), grid, ("mean_n",), "delta")


def rabi_scan(base: SystemParams, eta_grid, n_max: int = 8, workers: int = 1) -> SweepResult:
    """Zero-delay correlations versus drive strength at pair resonance.

    Every point fixes delta_a = delta_cav to the two-photon resonance value
    -sqrt(6)*g/2 derived from ``base.g`` and sweeps eta over ``eta_grid``.
    """
    if n_max < 3:
        raise ValueError("rabi_scan computes g3(0) and requires n_max >= 3")
    grid = np.atleast_1d(np.asarray(eta_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("eta grid must be nonempty")
    resonant = base.at_detuning(two_photon_resonance_detuning(base.g))
    jobs = [(replace(resonant, eta=float(eta)), n_max, True) for eta in grid]
    return _collect(_run_scan(jobs, workers), grid, ("mean_n", "g2_0", "g3_0"), "eta")


# ---------------------------------------------------------------------------
# deterministic period extraction from correlation series


def _peak_indices(taus, values, window, prominence_frac):
    lo, hi = window
    mask = (taus >= lo) & (taus <= hi)
    segment = values[mask]
    if segment.size < 3:
        raise ValueError("window contains too few samples for peak extraction")
    span = float(np.ptp(segment))
    prominence = prominence_frac * span if span > 0 else None
    peaks, _ = find_peaks(segment, prominence=prominence)
    return taus[mask][peaks]


def dominant_period(
    series: CorrelationSeries,
    window: tuple = (0.0, 1.0),
    prominence_frac: float = PEAK_PROMINENCE_FRAC,
) -> float:
    """Mean spacing of successive local maxima of the raw series in ``window``.

    The default window stays inside the first slow-modulation half-cycle;
    beyond it the carrier phase slips where the envelope suppresses the
    oscillation and the spacings no longer measure the carrier.
    """
    peak_taus = _peak_indices(series.tau_grid, series.values, window, prominence_frac)
    if peak_taus.size < 2:
        raise ValueError("need at least two maxima to estimate a period")
    return float(np.mean(np.diff(peak_taus)))


def modulation_period(
    series: CorrelationSeries,
    carrier_period: float,
    window: tuple = (0.0, 8.0),
    prominence_frac: float = PEAK_PROMINENCE_FRAC,
) -> float:
    """Slow-modulation period from the low-pass component of the series.

    A boxcar of one carrier period is applied twice (a triangular filter,
    so the residual carrier leak is suppressed quadratically and cannot
    split the slow maxima); the period is the mean spacing of the smoothed
    maxima inside ``window``.
    """
    taus = series.tau_grid
    dt = float(taus[1] - taus[0])
    width = max(1, int(round(carrier_period / dt)))
    kernel = np.ones(width) / width
    smoothed = np.convolve(np.convolve(series.values, kernel, mode="same"), kernel, mode="same")
    # keep clear of the edge effects of the two filter passes
    lo = max(window[0], taus[0] + 2 * width * dt)
    hi = min(window[1], taus[-1] - 2 * width * dt)
    peak_taus = _peak_indices(taus, smoothed, (lo, hi), prominence_frac)
    if peak_taus.size < 2:
        raise ValueError("need at least two smoothed maxima to estimate a period")
    return float(np.mean(np.diff(peak_taus)))
