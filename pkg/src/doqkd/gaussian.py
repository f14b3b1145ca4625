"""Covariance-matrix algebra for Gaussian states.

All states are zero-mean and described by a real symmetric 2N x 2N covariance
matrix in quadrature ordering (x1, p1, ..., xN, pN) with the vacuum normalized
to variance 1/2, i.e. physicality reads Gamma + (i/2) Omega >= 0.  Entropies
are in bits throughout so that key rates come out in bits per coincidence.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "UnphysicalStateError",
    "symplectic_form",
    "is_physical",
    "physicality_margin",
    "is_symplectic",
    "symplectic_eigenvalues",
    "von_neumann_entropy",
    "apply_symplectic",
    "condition_on_homodyne",
    "submatrix",
]

SYMMETRY_RTOL = 1e-12
PHYSICALITY_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10
PINV_RCOND = 1e-12


class UnphysicalStateError(ValueError):
    """Raised when a covariance matrix violates the uncertainty principle."""


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form, one [[0,1],[-1,0]] block per mode."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), block)


def _as_cov(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
        raise ValueError(f"covariance must be square with even dimension, got {g.shape}")
    scale = max(1.0, float(np.abs(g).max()))
    if np.abs(g - g.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError("covariance matrix is not symmetric")
    return 0.5 * (g + g.T)


def physicality_margin(g: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian matrix Gamma + (i/2) Omega.

    Non-negative (up to tolerance) iff the state is physical.
    """
    g = _as_cov(g)
    omega = symplectic_form(g.shape[0] // 2)
    herm = g + 0.5j * omega
    return float(np.linalg.eigvalsh(herm).min())


def is_physical(g: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    """Check the uncertainty principle Gamma + (i/2) Omega >= 0."""
    return physicality_margin(g) >= -tol


def _require_physical(g: np.ndarray) -> np.ndarray:
    g = _as_cov(g)
    margin = physicality_margin(g)
    if margin < -PHYSICALITY_TOL:
        raise UnphysicalStateError(
            f"covariance violates the uncertainty principle (margin {margin:.3e})"
        )
    return g


def is_symplectic(s: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    """Check S Omega S^T = Omega entrywise."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
        return False
    omega = symplectic_form(s.shape[0] // 2)
    return bool(np.abs(s @ omega @ s.T - omega).max() <= tol)


def symplectic_eigenvalues(g: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a physical covariance matrix.

    Computed as the absolute eigenvalues of i Omega Gamma, which come in
    degenerate pairs; returns the N distinct values in descending order.
    Every value is >= 1/2 up to tolerance, with equality on pure modes.
    """
    g = _require_physical(g)
    n = g.shape[0] // 2
    omega = symplectic_form(n)
    ev = np.sort(np.abs(np.linalg.eigvals(1j * omega @ g)))[::-1]
    nu = ev[::2]
    # guard against pairing error on near-degenerate spectra
    if np.abs(ev[::2] - ev[1::2]).max() > 1e-6 * max(1.0, ev[0]):
        raise ArithmeticError("symplectic eigenvalue pairing failed")
    return np.maximum(nu, 0.5)


def _mode_entropy(nu: float) -> float:
    # thermal-mode entropy in bits; nu -> 1/2 limit short-circuited to 0
    if nu - 0.5 < 1e-12:
        return 0.0
    return float((nu + 0.5) * np.log2(nu + 0.5) - (nu - 0.5) * np.log2(nu - 0.5))


def von_neumann_entropy(g: np.ndarray) -> float:
    """von Neumann entropy of a Gaussian state in bits."""
    return sum(_mode_entropy(nu) for nu in symplectic_eigenvalues(g))


def apply_symplectic(g: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Congruence transform S Gamma S^T; requires S symplectic."""
    g = _as_cov(g)
    s = np.asarray(s, dtype=float)
    if s.shape != g.shape:
        raise ValueError(f"dimension mismatch: state {g.shape}, transform {s.shape}")
    if not is_symplectic(s):
        raise ValueError("transform does not satisfy S Omega S^T = Omega")
    out = s @ g @ s.T
    return 0.5 * (out + out.T)


def condition_on_homodyne(g: np.ndarray, measured_mode: int, quadrature: str) -> np.ndarray:
    """Covariance of the remaining modes after an ideal homodyne measurement.

    The measured quadrature ('x' or 'p') of `measured_mode` is projected out
    via the Schur complement with a pseudoinverse (the projector is rank one).
    The result does not depend on the measurement outcome, a property of
    Gaussian states, so no outcome argument is needed.
    """
    g = _require_physical(g)
    n = g.shape[0] // 2
    if not 0 <= measured_mode < n:
        raise IndexError(f"measured_mode {measured_mode} out of range for {n} modes")
    if quadrature not in ("x", "p"):
        raise ValueError("quadrature must be 'x' or 'p'")
    qi = 0 if quadrature == "x" else 1
    idx_m = [2 * measured_mode, 2 * measured_mode + 1]
    idx_r = [i for i in range(2 * n) if i not in idx_m]
    a = g[np.ix_(idx_m, idx_m)]
    cross = g[np.ix_(idx_m, idx_r)]
    rest = g[np.ix_(idx_r, idx_r)]
    proj = np.zeros((2, 2))
    proj[qi, qi] = 1.0
    pinv = np.linalg.pinv(proj @ a @ proj, rcond=PINV_RCOND)
    out = rest - cross.T @ pinv @ cross
    return 0.5 * (out + out.T)


def submatrix(g: np.ndarray, modes) -> np.ndarray:
    """Principal block of the covariance for the listed modes."""
    g = _as_cov(g)
    n = g.shape[0] // 2
    modes = list(modes)
    for m in modes:
        if not 0 <= m < n:
            raise IndexError(f"mode index {m} out of range for {n} modes")
    idx = [q for m in modes for q in (2 * m, 2 * m + 1)]
    return g[np.ix_(idx, idx)].copy()
