"""Frequency-domain solution of the Langevin equations.

Fourier convention a(omega) = int a(t) e^{i omega t} dt, under which the
Langevin system dA/dt = m A - sqrt(D) A_in gives

    A_out(omega) = S(omega) A_in(omega),
    S(omega) = I + D^{1/2} (m + i omega I)^{-1} D^{1/2},

with D = diag(decay). Input channel correlations are bookkept by a single
coefficient matrix C defined by <A_in(omega) A_in^T(omega')> =
2 pi delta(omega + omega') C: the optical inputs are vacuum
(C[a_in, a_in^dag] = 1), the mechanical input is thermal
(C[b_in, b_in^dag] = n_th + 1, C[b_in^dag, b_in] = n_th).

With W(omega) = S(omega) C S^T(-omega), the output-beam correlators read
(1-based indices in the fixed ordering):

    n_plus(omega)  - 1/2 = W_21(-omega)   (occupation of beam 1 at +omega)
    n_minus(omega) - 1/2 = W_43(+omega)   (occupation of beam 2 at -omega)
    xi(omega)             = W_13(+omega)  (<A_1,omega A_2,-omega>)

The -omega argument in n_plus comes from the conjugation pairing of the
doubled basis; expanded over channels it is the familiar photon-number sum
|S_12(omega)|^2 + |S_14(omega)|^2 + n_th |S_15(omega)|^2
+ (n_th+1) |S_16(omega)|^2, which reproduces the effective-model closed
form n_plus = |S_14(omega)|^2 + 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from numpy.typing import NDArray

from .errors import QuadratureError, UnstableSystemError
from .gaussian import CorrelatorTriple
from .models import DriftMatrix, EffectiveModelParams, drift_effective, stability
from .quadutil import adaptive_gk


@dataclass(frozen=True)
class ScatteringMatrix:
    """Frequency-tagged linear map from input to output operators."""

    omega: float
    s: NDArray[np.complex128]

    def __post_init__(self):
        s = np.array(self.s, dtype=complex)
        s.flags.writeable = False
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "omega", float(self.omega))

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    def flux_relation_defect(self) -> float:
        """Max-norm violation of the Bogoliubov relation S K S^dag = K with
        K = diag(+1, -1, ...), which encodes commutator preservation."""
        k_sig = np.diag([1.0, -1.0] * (self.dim // 2))
        return float(np.max(np.abs(self.s @ k_sig @ self.s.conj().T - k_sig)))


@dataclass(frozen=True)
class SpectrumPoint:
    """Output intensity spectrum of beam 1 at one frequency, split into the
    contributions of the optical and mechanical input channels (the input
    baths are uncorrelated, so the two parts add up to the total)."""

    omega: float
    total: float
    optical_part: float
    mechanical_part: float


def _require_stable(d: DriftMatrix) -> None:
    rep = stability(d)
    if not rep.stable:
        raise UnstableSystemError(rep.max_real_part)


def scattering_matrices(d: DriftMatrix, omegas: np.ndarray) -> NDArray[np.complex128]:
    """Stacked scattering matrices S(omega_k), shape (len(omegas), dim, dim).

    Vectorized over frequencies through a stacked matrix inverse.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = d.dim
    a = np.broadcast_to(d.m, (omegas.size, n, n)).copy()
    idx = np.arange(n)
    a[:, idx, idx] += 1j * omegas[:, None]
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise UnstableSystemError(
            float(np.max(np.linalg.eigvals(d.m).real)),
            "singular response matrix: system at an instability threshold "
            f"for a requested frequency ({exc})") from exc
    sq = np.sqrt(d.decay)
    s = sq[None, :, None] * inv * sq[None, None, :]
    s[:, idx, idx] += 1.0
    return s


def scattering_matrix(d: DriftMatrix, omega: float) -> ScatteringMatrix:
    """S(omega) = I + D^{1/2} (m + i omega I)^{-1} D^{1/2}."""
    return ScatteringMatrix(omega, scattering_matrices(d, np.array([omega]))[0])


def input_noise_matrix(dim: int, n_th: float = 0.0) -> NDArray[np.float64]:
    """Delta-function coefficient matrix C of the input correlations in the
    doubled ordering; mechanical channels exist only for dim = 6."""
    if dim not in (4, 6):
        raise ValueError("expected a 4- or 6-dimensional doubled basis")
    c = np.zeros((dim, dim))
    c[0, 1] = 1.0
    c[2, 3] = 1.0
    if dim == 6:
        c[4, 5] = n_th + 1.0
        c[5, 4] = n_th
    return c


def correlator_batch(d: DriftMatrix, omegas: np.ndarray, n_th: float = 0.0,
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(n_plus, n_minus, xi) arrays over a frequency grid; no stability check
    (meant for integrators that have already verified it)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = omegas.size
    s_all = scattering_matrices(d, np.concatenate([omegas, -omegas]))
    sp, sm = s_all[:n], s_all[n:]
    c = input_noise_matrix(d.dim, n_th)
    n_plus = 0.5 + np.einsum("kj,jl,kl->k", sm[:, 1, :], c, sp[:, 0, :]).real
    n_minus = 0.5 + np.einsum("kj,jl,kl->k", sp[:, 3, :], c, sm[:, 2, :]).real
    xi = np.einsum("kj,jl,kl->k", sp[:, 0, :], c, sm[:, 2, :])
    return n_plus, n_minus, xi


def output_correlators(d: DriftMatrix, omega: float, n_th: float = 0.0,
                       check_stability: bool = True) -> CorrelatorTriple:
    """Correlator triple of the output beams at (omega, -omega)."""
    if check_stability:
        _require_stable(d)
    n_plus, n_minus, xi = correlator_batch(d, np.array([omega]), n_th)
    return CorrelatorTriple(float(n_plus[0]), float(n_minus[0]), complex(xi[0]))


def intra_beam_correlator(d: DriftMatrix, omega: float, n_th: float = 0.0,
                          beam: int = 1) -> complex:
    """<a_out(omega) a_out(-omega)> within one beam (W_11 or W_33); vanishes
    identically for these models -- no intra-beam squeezing."""
    row = 0 if beam == 1 else 2
    s_all = scattering_matrices(d, np.array([omega, -omega]))
    c = input_noise_matrix(d.dim, n_th)
    return complex(s_all[0, row, :] @ c @ s_all[1, row, :])


def output_spectrum(d: DriftMatrix, omega: float, n_th: float = 0.0) -> SpectrumPoint:
    """Channel-resolved output intensity spectrum of beam 1.

    total = n_plus(omega) - 1/2; the optical part collects input channels
    1-4, the mechanical part channels 5-6.
    """
    _require_stable(d)
    s_all = scattering_matrices(d, np.array([omega, -omega]))
    sp, sm = s_all[0], s_all[1]
    c = input_noise_matrix(d.dim, n_th)
    contrib = sm[1, :, None] * c * sp[0, None, :]   # terms W_21(-omega)[j, l]
    optical = float(contrib[:4, :4].sum().real)
    mechanical = float(contrib[4:, 4:].sum().real) if d.dim == 6 else 0.0
    return SpectrumPoint(omega=float(omega), total=optical + mechanical,
                         optical_part=optical, mechanical_part=mechanical)


def resonance_frequencies(d: DriftMatrix) -> NDArray[np.float64]:
    """Real frequencies at which (m + i omega I) is near-singular: the
    negated imaginary parts of the drift eigenvalues."""
    return np.unique(-np.linalg.eigvals(d.m).imag)


def pair_rate_numeric(p: EffectiveModelParams, rel_tol: float = 1e-9,
                      tail_rel: float = 1e-8) -> float:
    """Photon pair creation rate int domega/2pi (n_plus(omega) - 1/2) of the
    effective optical model, by adaptive panel quadrature.

    The window [-W, W] is doubled until the power-law tail estimate drops
    below tail_rel of the accumulated integral.
    """
    d = drift_effective(p)
    _require_stable(d)

    def flux(omegas: np.ndarray) -> np.ndarray:
        return correlator_batch(d, omegas, 0.0)[0] - 0.5

    res = resonance_frequencies(d)
    span = float(max(np.max(np.abs(res)), p.kappa))
    w = 32.0 * span
    value = err = 0.0
    for _ in range(40):
        seeds = [x for x in np.concatenate([res, -res, [0.0]]) if -w < x < w]
        value, err = adaptive_gk(flux, -w, w, epsabs=max(rel_tol, 1e-12) * 0.1,
                                 initial_points=seeds)
        # |S_14|^2 falls off like omega^-4, so the two tails carry ~ f(W) W / 3
        tail = float(flux(np.array([w, -w])).sum()) * w / 3.0
        if abs(tail) <= tail_rel * max(abs(value), 1e-300):
            return (value + tail) / (2.0 * math.pi)
        w *= 2.0
    raise QuadratureError("pair-rate window grew without the tail converging",
                          value=value / (2.0 * math.pi), error_estimate=err)


# -- extended-precision path ------------------------------------------------

def correlators_mp(d: DriftMatrix, omega: float, n_th: float = 0.0,
                   dps: int = 50) -> tuple[mp.mpf, mp.mpf, mp.mpc]:
    """Correlator triple evaluated with mpmath at `dps` decimal digits.

    Mirrors correlator_batch exactly (same S/C/W pipeline); used where the
    downstream log-negativity suffers a float64-fatal cancellation, e.g. at
    cooperativities ~1e4 where ~12 digits cancel.
    """
    with mp.workdps(dps):
        n = d.dim
        sq = [mp.sqrt(mp.mpf(x)) for x in d.decay]

        def smat(w: mp.mpf) -> mp.matrix:
            a = mp.matrix(n)
            for i in range(n):
                for j in range(n):
                    a[i, j] = mp.mpc(d.m[i, j])
                a[i, i] += mp.mpc(0, 1) * w
            inv = a ** -1
            s = mp.matrix(n)
            for i in range(n):
                for j in range(n):
                    s[i, j] = sq[i] * inv[i, j] * sq[j]
                s[i, i] += 1
            return s

        w = mp.mpf(omega)
        sp = smat(w)
        sm = sp if omega == 0.0 else smat(-w)
        weights = {(0, 1): mp.mpf(1), (2, 3): mp.mpf(1)}
        if n == 6:
            weights[(4, 5)] = mp.mpf(n_th) + 1
            weights[(5, 4)] = mp.mpf(n_th)

        def went(sa: mp.matrix, sb: mp.matrix, r: int, c: int) -> mp.mpc:
            return mp.fsum(sa[r, j] * wt * sb[c, k] for (j, k), wt in weights.items())

        n_plus = mp.mpf(0.5) + went(sm, sp, 1, 0).real
        n_minus = mp.mpf(0.5) + went(sp, sm, 3, 2).real
        xi = went(sp, sm, 0, 2)
        return n_plus, n_minus, xi


def log_negativity_mp(d: DriftMatrix, omega: float, n_th: float = 0.0,
                      dps: int = 50) -> float:
    """max(0, -ln(2 eta_minus)) of the output pair at (omega, -omega),
    with the whole pipeline in extended precision."""
    _require_stable(d)
    n_plus, n_minus, xi = correlators_mp(d, omega, n_th, dps)
    with mp.workdps(dps):
        xi_sq = xi.real ** 2 + xi.imag ** 2
        diff = n_plus - n_minus
        root = mp.sqrt(diff * diff + 4 * xi_sq)
        two_eta = 4 * (n_plus * n_minus - xi_sq) / (n_plus + n_minus + root)
        if two_eta <= 0:
            raise ValueError(f"unphysical 2*eta_minus = {two_eta}")
        return float(max(mp.mpf(0), -mp.log(two_eta)))
