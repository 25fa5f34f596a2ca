"""Parameter sets and drift matrices for the linear bosonic network models.

Two models are provided: the "full" model with two localized optical modes
coupled to one mechanical mode (6 doubled operators), and the "effective"
purely optical model obtained after adiabatic elimination of the mechanics
(4 doubled operators).

All rates are expressed in units of the optical intensity decay rate kappa,
which is stored explicitly so that dimensional output remains possible.
The operator ordering is fixed to (a+, a+^dag, a-, a-^dag[, b, b^dag]);
the Langevin system reads dA/dt = m A - sqrt(decay) A_in per channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

FULL_ORDERING = ("a_plus", "a_plus_dag", "a_minus", "a_minus_dag", "b", "b_dag")
EFFECTIVE_ORDERING = FULL_ORDERING[:4]

#: Eigenvalue real parts below this (in kappa units) count as strictly stable.
STABILITY_TOL = 1e-9
#: Constructor tolerance on the (op, op^dag) pairing structure of drift matrices.
PAIRING_DEFECT_TOL = 1e-12


@dataclass(frozen=True)
class FullModelParams:
    """Rates of the full optomechanical model, in units of kappa.

    g is the linearized coupling, Gamma the mechanical damping, Delta the
    laser detuning, delta the frequency mismatch between the mechanical
    frequency and the optical mode spacing, n_th the mechanical bath
    occupation.
    """

    g: float
    Gamma: float
    kappa: float = 1.0
    Delta: float = 0.0
    delta: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.Gamma <= 0:
            raise ValueError("Gamma must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.n_th < 0:
            raise ValueError("n_th must be non-negative")

    @property
    def cooperativity(self) -> float:
        return self.g ** 2 / (self.kappa * self.Gamma)


@dataclass(frozen=True)
class EffectiveModelParams:
    """Rates of the effective optical model (mechanics eliminated)."""

    g: float
    delta: float
    kappa: float = 1.0
    Delta: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.delta == 0:
            raise ValueError("delta must be nonzero (the pair coupling is g^2/4delta)")

    def in_validity_regime(self, factor: float = 5.0) -> bool:
        """True when |delta| exceeds kappa and g by `factor` and dominates
        |Delta| likewise -- the regime in which the adiabatic elimination
        behind this model is controlled."""
        big = abs(self.delta)
        return big >= factor * max(self.kappa, self.g) and big >= factor * abs(self.Delta)


@dataclass(frozen=True)
class DriftMatrix:
    """Generator of the linear Langevin dynamics in the doubled operator
    basis, plus per-channel decay rates.

    Rows/columns pair up as (op, op^dag); the constructor enforces the
    conjugation symmetry m = P conj(m) P with P the partner swap.
    """

    m: NDArray[np.complex128]
    decay: NDArray[np.float64]
    ordering: tuple[str, ...]

    def __post_init__(self):
        m = np.array(self.m, dtype=complex)
        decay = np.array(self.decay, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"drift matrix must be square with even dim, got {m.shape}")
        if decay.shape != (m.shape[0],):
            raise ValueError("decay must hold one rate per operator row")
        if np.any(decay < 0):
            raise ValueError("decay rates must be non-negative")
        if len(self.ordering) != m.shape[0]:
            raise ValueError("ordering must label every operator row")
        scale = max(1.0, float(np.max(np.abs(m))))
        if pairing_defect(m) > PAIRING_DEFECT_TOL * scale:
            raise ValueError("drift matrix breaks the (op, op^dag) pairing structure")
        m.flags.writeable = False
        decay.flags.writeable = False
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "decay", decay)
        object.__setattr__(self, "ordering", tuple(self.ordering))

    @property
    def dim(self) -> int:
        return self.m.shape[0]


def pairing_defect(m: np.ndarray) -> float:
    """Max-norm violation of m = P conj(m) P, where P swaps each operator
    with its daggered partner (rows and columns 2i <-> 2i+1)."""
    m = np.asarray(m)
    n = m.shape[0]
    perm = np.arange(n).reshape(-1, 2)[:, ::-1].ravel()
    return float(np.max(np.abs(m - np.conj(m)[np.ix_(perm, perm)])))


def drift_full(p: FullModelParams) -> DriftMatrix:
    """6x6 drift matrix of the full model.

    Encodes da+/dt = i Delta a+ + i(g/2) b - (kappa/2) a+ - sqrt(kappa) a+_in
    and its partners; the mechanical rows carry -i delta and couple to
    (a+, a-^dag) with i g/2.
    """
    hg = 0.5j * p.g
    ka = 1j * p.Delta - p.kappa / 2
    m = np.zeros((6, 6), dtype=complex)
    m[0, 0] = ka;            m[0, 4] = hg
    m[1, 1] = np.conj(ka);   m[1, 5] = -hg
    m[2, 2] = ka;            m[2, 5] = hg
    m[3, 3] = np.conj(ka);   m[3, 4] = -hg
    m[4, 4] = -1j * p.delta - p.Gamma / 2
    m[4, 0] = hg;            m[4, 3] = hg
    m[5, 5] = 1j * p.delta - p.Gamma / 2
    m[5, 1] = -hg;           m[5, 2] = -hg
    decay = np.array([p.kappa] * 4 + [p.Gamma] * 2)
    return DriftMatrix(m, decay, FULL_ORDERING)


def drift_effective(p: EffectiveModelParams) -> DriftMatrix:
    """4x4 drift matrix of the effective optical model: diagonal
    +-i(Delta + g^2/4delta) - kappa/2 with anti-diagonal pair couplings
    +-i g^2/4delta."""
    gp = p.g ** 2 / (4.0 * p.delta)
    dg = 1j * (p.Delta + gp) - p.kappa / 2
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = dg;          m[0, 3] = 1j * gp
    m[1, 1] = np.conj(dg); m[1, 2] = -1j * gp
    m[2, 2] = dg;          m[2, 1] = 1j * gp
    m[3, 3] = np.conj(dg); m[3, 0] = -1j * gp
    return DriftMatrix(m, np.full(4, float(p.kappa)), EFFECTIVE_ORDERING)


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    max_real_part: float
    marginal: bool


def stability(d: DriftMatrix, tol: float = STABILITY_TOL) -> StabilityReport:
    """Numerical stability verdict from the drift eigenvalues.

    stable means max Re(eig) < tol; points with |max Re(eig)| <= tol are
    flagged marginal.
    """
    max_re = float(np.max(np.linalg.eigvals(d.m).real))
    return StabilityReport(stable=max_re < tol, max_real_part=max_re,
                           marginal=abs(max_re) <= tol)


def stability_boundary_effective(g: float, kappa: float, delta: float) -> tuple[float, ...]:
    """Real detunings Delta solving (Delta + g^2/2delta) Delta + (kappa/2)^2 = 0,
    sorted ascending; empty when the discriminant is negative (always
    optically stable)."""
    if delta == 0:
        raise ValueError("delta must be nonzero")
    b = g ** 2 / (2.0 * delta)
    disc = b * b - kappa * kappa
    if disc < 0:
        return ()
    # stable quadratic formula, avoids cancellation for |b| >> kappa
    r1 = -(b + math.copysign(math.sqrt(disc), b)) / 2.0
    r2 = (kappa / 2.0) ** 2 / r1
    return tuple(sorted((r1, r2)))


@dataclass(frozen=True)
class CellParams:
    """Microscopic parameters of the three coupled optomechanical cells:
    tunneling rates K1, K2, bare single-photon coupling g0, and the coherent
    amplitude of the driven center normal mode."""

    K1: float
    K2: float
    g0: float
    alpha: complex

    def __post_init__(self):
        if self.K1 ** 2 + self.K2 ** 2 <= 0:
            raise ValueError("at least one tunneling rate must be nonzero")


@dataclass(frozen=True)
class CellMapping:
    params: FullModelParams
    J: float
    g0_eff: float


def map_cell_params(c: CellParams, kappa: float, Gamma: float, Omega: float,
                    n_th: float, Delta: float = 0.0) -> CellMapping:
    """Map the three-cell normal-mode parameters onto the full model.

    J = sqrt(K1^2 + K2^2) is the optical normal-mode splitting,
    g0_eff = g0 K1 K2 / (K1^2 + K2^2) the effective single-photon coupling
    to the relevant mechanical normal mode, g = 2 g0_eff |alpha| the
    linearized coupling, and delta = Omega - J. The drive detuning Delta is
    not fixed by the cell geometry and defaults to 0.
    """
    ksq = c.K1 ** 2 + c.K2 ** 2
    J = math.sqrt(ksq)
    g0_eff = c.g0 * c.K1 * c.K2 / ksq
    g = 2.0 * abs(g0_eff) * abs(c.alpha)
    params = FullModelParams(g=g, Gamma=Gamma, kappa=kappa, Delta=Delta,
                             delta=Omega - J, n_th=n_th)
    return CellMapping(params=params, J=J, g0_eff=g0_eff)
