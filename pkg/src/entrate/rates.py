"""Spectral density of entanglement E[omega] and the total entanglement rate.

E[omega] = max(0, -ln(2 eta_minus(omega))) is the log-negativity of the
output mode pair at (omega, -omega); it is double-sided in omega. The rate
Gamma_E = int domega/2pi E[omega] is reported in units of kappa, i.e. nats
of entanglement per 1/kappa of time.

The integrator first scans a grid seeded at the drift resonance frequencies
(so narrow near-instability peaks are never missed), locates the boundary of
the E > 0 region by bisection on 2 eta_minus = 1 where a crossing exists,
and extends the window adaptively where E stays positive with a power-law
tail (at delta = Delta = 0 that tail falls off like |omega|^-3 and never
crosses zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from .errors import QuadratureError, UnstableSystemError
from .models import DriftMatrix, stability
from .quadutil import adaptive_gk, bisect_all
from .scattering import correlator_batch, log_negativity_mp, resonance_frequencies

_PEAK_OFFSETS = np.array([0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0,
                          5.0, -5.0, 10.0, -10.0, 25.0, -25.0, 50.0, -50.0,
                          100.0, -100.0])


def two_eta_minus_batch(d: DriftMatrix, omegas: np.ndarray,
                        n_th: float = 0.0) -> np.ndarray:
    """Un-clipped 2*eta_minus over a frequency grid (cancellation-free form)."""
    n_plus, n_minus, xi = correlator_batch(d, omegas, n_th)
    xi_abs = np.abs(xi)
    q = n_plus * n_minus - xi_abs ** 2
    root = np.hypot(n_plus - n_minus, 2.0 * xi_abs)
    return 4.0 * q / (n_plus + n_minus + root)


def two_eta_minus(d: DriftMatrix, omega: float, n_th: float = 0.0) -> float:
    return float(two_eta_minus_batch(d, np.array([omega]), n_th)[0])


def spectral_density_batch(d: DriftMatrix, omegas: np.ndarray,
                           n_th: float = 0.0) -> np.ndarray:
    """E[omega] over a frequency grid; no stability check."""
    two_eta = two_eta_minus_batch(d, omegas, n_th)
    if np.any(two_eta <= 0):
        raise UnstableSystemError(
            float("nan"), "non-positive 2*eta_minus encountered; "
            "the output covariance is unphysical (check stability)")
    return np.maximum(0.0, -np.log(two_eta))


def spectral_density(d: DriftMatrix, omega: float, n_th: float = 0.0,
                     dps: int | None = None) -> float:
    """Spectral density of entanglement at one frequency.

    dps switches the whole correlator pipeline to mpmath with that many
    decimal digits; needed when comparing against closed forms at relative
    1e-9 for large cooperativities, where float64 loses the cancellation
    n+ n- - |xi|^2 (about 12 of 16 digits at C ~ 2.5e4).
    """
    rep = stability(d)
    if not rep.stable:
        raise UnstableSystemError(rep.max_real_part)
    if dps is not None:
        return log_negativity_mp(d, omega, n_th, dps)
    return float(spectral_density_batch(d, np.array([omega]), n_th)[0])


def symmetrized_density(d: DriftMatrix, omega: float, n_th: float = 0.0) -> float:
    """One-sided density E_N[omega] = E[omega] + E[-omega], omega > 0."""
    if omega <= 0:
        raise ValueError("the symmetrized density is defined for omega > 0")
    rep = stability(d)
    if not rep.stable:
        raise UnstableSystemError(rep.max_real_part)
    vals = spectral_density_batch(d, np.array([omega, -omega]), n_th)
    return float(vals.sum())


@dataclass
class EntanglementSpectrum:
    """Sampled E[omega] curve. When built by sample_spectrum it keeps a
    pointwise evaluator so that peak statistics can be refined beyond the
    sampling grid; synthetic spectra are interpolated linearly instead."""

    omegas: np.ndarray
    values: np.ndarray
    evaluator: Callable[[float], float] | None = field(default=None, repr=False)
    quadrature_error: float = 0.0

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.omegas.shape != self.values.shape or self.omegas.ndim != 1:
            raise ValueError("omegas and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.omegas) <= 0):
            raise ValueError("samples must be sorted by omega")
        if np.any(self.values < 0):
            raise ValueError("spectral densities must be non-negative")


def sample_spectrum(d: DriftMatrix, n_th: float, omegas: np.ndarray) -> EntanglementSpectrum:
    """Evaluate E over a frequency grid, returning a refinable spectrum."""
    rep = stability(d)
    if not rep.stable:
        raise UnstableSystemError(rep.max_real_part)
    omegas = np.sort(np.asarray(omegas, dtype=float))
    vals = spectral_density_batch(d, omegas, n_th)
    return EntanglementSpectrum(
        omegas, vals,
        evaluator=lambda w: float(spectral_density_batch(d, np.array([w]), n_th)[0]))


@dataclass(frozen=True)
class RateResult:
    """Entanglement rate plus peak statistics of the E[omega] curve."""

    gamma_E: float
    E_max: float
    omega_max: float
    fwhm: float
    quadrature_error: float
    secondary_peaks: int


def _probe_points(d: DriftMatrix) -> np.ndarray:
    """Scan grid seeded at drift resonances, with per-resonance offsets
    scaled by the local linewidth, plus a coarse global grid."""
    eigs = np.linalg.eigvals(d.m)
    centers = np.concatenate([-eigs.imag, [0.0]])
    widths = np.concatenate([np.maximum(np.abs(eigs.real), 1e-12), [np.max(d.decay)]])
    span = float(np.max(np.abs(centers)) + 20.0 * np.max(d.decay) + 1.0)
    pts = [np.linspace(-span, span, 241)]
    for c, wdt in zip(centers, widths):
        pts.append(c + wdt * _PEAK_OFFSETS)
    out = np.unique(np.concatenate(pts))
    return out[(out >= -span) & (out <= span)]


def _positive_intervals(d: DriftMatrix, n_th: float, tol: float,
                        ) -> tuple[list[tuple[float, float]], np.ndarray, np.ndarray, float]:
    """Locate the E > 0 region: intervals where 1 - 2 eta_minus > 0, with
    crossing edges refined by bisection, and the outer window grown until
    the E tail estimate is below the tolerance budget."""

    def h_batch(w):
        return 1.0 - two_eta_minus_batch(d, np.asarray(w, dtype=float), n_th)

    probes = _probe_points(d)
    h = h_batch(probes)

    # grow the window while E at the boundary still matters; the decay
    # exponent is measured on the outer octave so the tail estimate
    # E(W) * W / (p - 1) tracks the actual power law
    tail_budget = 0.25 * tol * 2.0 * math.pi
    tail = 0.0
    for _ in range(48):
        w_edge = probes[-1]
        if h[0] <= 0.0 and h[-1] <= 0.0:
            tail = 0.0
            break
        e_edge = float(np.max(spectral_density_batch(
            d, np.array([probes[0], w_edge]), n_th)))
        w_half = 0.5 * w_edge
        e_half = float(np.max(spectral_density_batch(
            d, np.array([-w_half, w_half]), n_th)))
        p = math.log2(e_half / e_edge) if e_half > e_edge > 0.0 else 3.0
        p = min(max(p, 1.2), 8.0)
        tail = 2.0 * e_edge * w_edge / (p - 1.0)
        if tail <= tail_budget:
            break
        ext = np.geomspace(w_edge * 2.0, w_edge * 4.0, 5)
        probes = np.unique(np.concatenate([probes, ext, -ext]))
        h = h_batch(probes)
    else:
        raise QuadratureError("E[omega] tail did not fall below the tolerance budget",
                              error_estimate=tail)

    pos = h > 0.0
    if not np.any(pos):
        return [], probes, h, 0.0

    # bisect sign changes between adjacent probes
    flips = np.nonzero(np.diff(pos.astype(int)) != 0)[0]
    lo, hi = probes[flips], probes[flips + 1]
    edges = bisect_all(h_batch, lo, hi, xtol=1e-11 * max(1.0, probes[-1])) if flips.size else np.array([])

    # assemble intervals from the sign pattern
    boundaries: list[float] = []
    if pos[0]:
        boundaries.append(probes[0])
    boundaries.extend(edges.tolist())
    if pos[-1]:
        boundaries.append(probes[-1])
    intervals = [(boundaries[i], boundaries[i + 1])
                 for i in range(0, len(boundaries) - 1, 2)]
    intervals = [(a, b) for a, b in intervals if b > a]
    return intervals, probes, h, tail


def entanglement_rate(d: DriftMatrix, n_th: float = 0.0, tol: float = 1e-6) -> RateResult:
    """Gamma_E = int domega/2pi E[omega] by adaptive quadrature to absolute
    tolerance tol (in kappa units), plus E_max, its location, and the FWHM
    of the dominant peak."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    rep = stability(d)
    if not rep.stable:
        raise UnstableSystemError(rep.max_real_part)

    def e_batch(w):
        return spectral_density_batch(d, np.asarray(w, dtype=float), n_th)

    intervals, probes, h, tail = _positive_intervals(d, n_th, tol)
    if not intervals:
        return RateResult(0.0, 0.0, 0.0, 0.0, 0.0, 0)

    # panel edges seeded with the whole probe grid: the scan already resolved
    # the spectral structure, so refinement only has to polish
    seeds = np.unique(np.concatenate([resonance_frequencies(d), probes]))
    total = 0.0
    err = tail
    budget = tol * 2.0 * math.pi * 0.5
    lengths = np.array([b - a for a, b in intervals])
    for (a, b), ln in zip(intervals, lengths):
        inner = [s for s in seeds if a < s < b]
        val, e = adaptive_gk(e_batch, a, b, epsabs=budget * ln / lengths.sum(),
                             initial_points=inner)
        total += val
        err += e

    # peak statistics from the probe set, refined by a bounded minimizer
    mask = h > 0
    cand = probes[mask]
    cand_e = e_batch(cand)
    k = int(np.argmax(cand_e))
    lo = cand[k - 1] if k > 0 else cand[k] - 1e-6
    hi = cand[k + 1] if k + 1 < cand.size else cand[k] + 1e-6
    res = minimize_scalar(lambda w: -float(e_batch(np.array([w]))[0]),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10 * max(1.0, abs(cand[k]))})
    omega_max = float(res.x)
    e_max = float(-res.fun)
    if e_max < cand_e[k]:
        omega_max, e_max = float(cand[k]), float(cand_e[k])

    width = _fwhm_by_bisection(lambda w: e_batch(np.asarray(w, dtype=float)),
                               probes, e_batch(probes), omega_max, e_max)
    n_secondary = _count_local_maxima(cand, cand_e, e_max) - 1
    return RateResult(gamma_E=total / (2.0 * math.pi), E_max=e_max,
                      omega_max=omega_max, fwhm=width,
                      quadrature_error=err / (2.0 * math.pi),
                      secondary_peaks=max(n_secondary, 0))


def _count_local_maxima(x: np.ndarray, y: np.ndarray, e_max: float) -> int:
    """Peak count with a prominence floor of 1% of the dominant peak, so the
    float-level jitter of strongly squeezed points does not register."""
    if y.size < 3:
        return 1 if np.any(y > 0) else 0
    prominence = max(1e-9, 1e-2 * e_max)
    peaks, _ = find_peaks(y, prominence=prominence)
    return max(int(peaks.size), 1)


def _fwhm_by_bisection(e_batch, grid: np.ndarray, grid_vals: np.ndarray,
                       omega_max: float, e_max: float, xtol: float = 1e-9) -> float:
    """Half-maximum width of the dominant peak, bisected on both flanks."""
    if e_max <= 0:
        return 0.0
    half = 0.5 * e_max

    def crossing(direction: int) -> float:
        if direction > 0:
            outside = grid[(grid > omega_max) & (grid_vals < half)]
            hi = outside.min() if outside.size else None
        else:
            outside = grid[(grid < omega_max) & (grid_vals < half)]
            hi = outside.max() if outside.size else None
        if hi is None:
            # expand geometrically until below half maximum
            step = max(abs(omega_max), 1.0)
            hi = omega_max + direction * step
            for _ in range(120):
                if float(e_batch(np.array([hi]))[0]) < half:
                    break
                hi = omega_max + direction * (abs(hi - omega_max) * 2.0)
            else:
                raise QuadratureError("no half-maximum crossing found")
        root = bisect_all(lambda w: e_batch(w) - half,
                          np.array([min(omega_max, hi)]),
                          np.array([max(omega_max, hi)]),
                          xtol=xtol)[0]
        return float(root)

    return crossing(+1) - crossing(-1)


def fwhm(spectrum: EntanglementSpectrum, xtol: float = 1e-6) -> float:
    """Full width at half maximum of the dominant peak of a spectrum.

    With an evaluator the flanks are bisected on the underlying function
    (tolerance xtol, in kappa units); otherwise the sampled curve is
    interpolated linearly.
    """
    vals = spectrum.values
    if np.all(vals <= 0):
        raise ValueError("spectrum has no peak (all values are zero)")
    k = int(np.argmax(vals))
    e_max = float(vals[k])
    omega_max = float(spectrum.omegas[k])

    if spectrum.evaluator is not None:
        def e_batch(w):
            w = np.atleast_1d(np.asarray(w, dtype=float))
            return np.array([spectrum.evaluator(x) for x in w])

        res = minimize_scalar(lambda w: -spectrum.evaluator(w),
                              bounds=(spectrum.omegas[max(k - 1, 0)],
                                      spectrum.omegas[min(k + 1, vals.size - 1)]),
                              method="bounded")
        if -res.fun > e_max:
            e_max, omega_max = float(-res.fun), float(res.x)
        return _fwhm_by_bisection(e_batch, spectrum.omegas, vals, omega_max, e_max,
                                  xtol=xtol)

    half = 0.5 * e_max

    def interp_cross(direction: int) -> float:
        idx = range(k, vals.size - 1) if direction > 0 else range(k - 1, -1, -1)
        for i in idx:
            y0, y1 = vals[i], vals[i + 1]
            x0, x1 = spectrum.omegas[i], spectrum.omegas[i + 1]
            if (y0 - half) * (y1 - half) <= 0.0:
                if y1 == y0:
                    return float(x1)
                return float(x0 + (half - y0) * (x1 - x0) / (y1 - y0))
        raise ValueError("spectrum does not fall below half maximum on one flank")

    return interp_cross(+1) - interp_cross(-1)


def to_nats_per_second(gamma_e_kappa_units: float, kappa_hz: float) -> float:
    """Convert a rate in kappa units to nats per second, given kappa in 1/s."""
    return gamma_e_kappa_units * kappa_hz
