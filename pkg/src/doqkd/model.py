"""SPDC biphoton state model for dispersive-optics QKD.

Builds the two-mode covariance matrix shared by Alice and Bob from the source
parameters (laser coherence time sigma_coh, phase-matching correlation time
sigma_cor, dispersion coefficient k), together with the local symplectic
transform that reveals its two-mode-squeezed-vacuum structure, and the change
of basis to the physically measured observables.

Conventions: all times in nanoseconds, k in ns^2.  Quadrature ordering is
(x_A, p_A, x_B, p_B) with x_i the scaled arrival time T_i / s and p_i the
scaled dispersed-arrival time s * D_i, where s = sqrt(2 sigma_coh sigma_cor).
Alice carries the normal-dispersion sign and Bob the anomalous one; first
moments carry no information here and are fixed to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import gaussian

__all__ = [
    "SourceParams",
    "TmsvDecomposition",
    "CorrelatedVariances",
    "COMBINATION_LABELS",
    "COMBINATION_VECTORS",
    "MEASURED_COMBINATIONS",
    "build_covariance",
    "diagonalizing_symplectic",
    "k_from_group_delay",
    "group_delay_from_k",
    "measured_basis_cov",
    "correlated_variances",
]

SPEED_OF_LIGHT_NM_PER_PS = 2.99792458e5


@dataclass(frozen=True)
class SourceParams:
    """SPDC source description: times in ns, dispersion k in ns^2."""

    sigma_coh: float
    sigma_cor: float
    k: float

    def __post_init__(self):
        for name in ("sigma_coh", "sigma_cor", "k"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {value}")
        if self.sigma_coh <= self.sigma_cor:
            warnings.warn(
                "sigma_coh <= sigma_cor: coherence time shorter than the pair "
                "correlation time is outside the usual SPDC operating regime",
                stacklevel=2,
            )

    @property
    def u(self) -> float:
        return 16.0 * self.sigma_coh**2

    @property
    def v(self) -> float:
        return 4.0 * self.sigma_cor**2

    @property
    def alpha(self) -> float:
        """Local-squeezing strength u*v / (4 k^2) = 16 sigma_coh^2 sigma_cor^2 / k^2."""
        return self.u * self.v / (4.0 * self.k**2)

    @property
    def beta(self) -> float:
        """Diagonal of the TMSV form: sigma_coh/(2 sigma_cor) + sigma_cor/(8 sigma_coh)."""
        return self.sigma_coh / (2.0 * self.sigma_cor) + self.sigma_cor / (8.0 * self.sigma_coh)

    @property
    def time_scale(self) -> float:
        """Unit scale s = sqrt(2 sigma_coh sigma_cor) linking x to T (ns)."""
        return float(np.sqrt(2.0 * self.sigma_coh * self.sigma_cor))


@dataclass(frozen=True)
class TmsvDecomposition:
    """Local symplectics S1 (+) S2 taking the biphoton state to TMSV form."""

    alpha: float
    beta: float
    squeeze_r: float  # natural-log squeezing parameter, r = (1/2) ln(1 + alpha)
    s1: np.ndarray
    s2: np.ndarray


def build_covariance(p: SourceParams) -> np.ndarray:
    """4x4 covariance of the biphoton state in unitless quadratures.

    The state is pure: both symplectic eigenvalues equal 1/2.
    """
    u, v, k = p.u, p.v, p.k
    suv = np.sqrt(u * v)
    d = (u + v) / (4.0 * suv)
    e = (u + v) / (8.0 * k)
    f = (u + v) * (4.0 * k**2 + u * v) / (16.0 * k**2 * suv)
    cd = (u - v) / (4.0 * suv)
    ce = (u - v) / (8.0 * k)
    cf = (u - v) * (4.0 * k**2 + u * v) / (16.0 * k**2 * suv)
    g_aa = np.array([[d, e], [e, f]])
    g_ab = np.array([[cd, -ce], [ce, -cf]])
    g_bb = np.array([[d, -e], [-e, f]])
    return np.block([[g_aa, g_ab], [g_ab.T, g_bb]])


def diagonalizing_symplectic(p: SourceParams) -> TmsvDecomposition:
    """Local transform S1 (+) S2 that diagonalizes the blocks to beta*I.

    Applying the direct sum to build_covariance(p) yields diagonal blocks
    beta*I and off-diagonal sqrt(beta^2-1)*Z.  Both S1 and S2 are symplectic
    (unit determinant); their eigenvalues are (1+alpha)^(1/2) and its inverse,
    so the required local squeezing is r = (1/2) ln(1+alpha).
    """
    a = p.alpha
    sq = np.sqrt(1.0 + a)
    off = 1.0 / np.sqrt(1.0 + 1.0 / a)
    s1 = np.array([[sq, -off], [0.0, 1.0 / sq]])
    s2 = np.array([[sq, off], [0.0, 1.0 / sq]])
    return TmsvDecomposition(
        alpha=a,
        beta=p.beta,
        squeeze_r=0.5 * float(np.log1p(a)),
        s1=s1,
        s2=s2,
    )


def k_from_group_delay(group_delay_ps_per_nm: float, wavelength_nm: float) -> float:
    """Dispersion coefficient k (ns^2) from a group delay slope |D| (ps/nm).

    k = |D| lambda^2 / (pi c), i.e. twice the accumulated group-velocity
    dispersion beta2*L.  1500 ps/nm at 1550 nm gives k ~ 0.0038 ns^2.
    """
    if group_delay_ps_per_nm <= 0 or wavelength_nm <= 0:
        raise ValueError("group delay slope and wavelength must be positive")
    k_ps2 = group_delay_ps_per_nm * wavelength_nm**2 / (np.pi * SPEED_OF_LIGHT_NM_PER_PS)
    return float(k_ps2 * 1e-6)


def group_delay_from_k(k_ns2: float, wavelength_nm: float) -> float:
    """Inverse of k_from_group_delay: |D| in ps/nm."""
    if k_ns2 <= 0 or wavelength_nm <= 0:
        raise ValueError("k and wavelength must be positive")
    return float(k_ns2 * 1e6 * np.pi * SPEED_OF_LIGHT_NM_PER_PS / wavelength_nm**2)


def measured_basis_cov(g: np.ndarray, p: SourceParams) -> np.ndarray:
    """Covariance of the measured observables (T_A, (k/2)D_A, T_B, (k/2)D_B), ns^2.

    Both bases are read out as photon arrival times: direct detection measures
    T, detection behind the dispersive element measures (k/2)D.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-mode covariance, got {g.shape}")
    s = p.time_scale
    scale = np.diag([s, p.k / (2.0 * s), s, p.k / (2.0 * s)])
    out = scale @ g @ scale.T
    return 0.5 * (out + out.T)


# Sum/difference combinations of the measured observables, in the order used
# throughout: the first four are the combinations Alice and Bob actually
# monitor, the remaining four complete the set.
COMBINATION_LABELS = (
    "TA-TB",
    "DA+DB",
    "TA+DB",
    "TB-DA",
    "TA+TB",
    "DA-DB",
    "TA-DB",
    "TB+DA",
)

COMBINATION_VECTORS = np.array(
    [
        [1, 0, -1, 0],
        [0, 1, 0, 1],
        [1, 0, 0, 1],
        [0, -1, 1, 0],
        [1, 0, 1, 0],
        [0, 1, 0, -1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
    ],
    dtype=float,
)

MEASURED_COMBINATIONS = COMBINATION_LABELS[:4]


@dataclass(frozen=True)
class CorrelatedVariances:
    """The eight sum/difference variances of the measured observables (ns^2)."""

    ta_minus_tb: float
    da_plus_db: float
    ta_plus_db: float
    tb_minus_da: float
    ta_plus_tb: float
    da_minus_db: float
    ta_minus_db: float
    tb_plus_da: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.ta_minus_tb,
                self.da_plus_db,
                self.ta_plus_db,
                self.tb_minus_da,
                self.ta_plus_tb,
                self.da_minus_db,
                self.ta_minus_db,
                self.tb_plus_da,
            ]
        )

    @property
    def measured(self) -> np.ndarray:
        """The four combinations monitored in the protocol."""
        return self.as_array()[:4]


def correlated_variances(m: np.ndarray) -> CorrelatedVariances:
    """All eight correlated variances v^T M v from a measured-basis covariance."""
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 measured-basis covariance, got {m.shape}")
    values = [float(vec @ m @ vec) for vec in COMBINATION_VECTORS]
    return CorrelatedVariances(*values)
