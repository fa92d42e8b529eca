"""Coupling matrix, excitation, combined correlation matrix and its spectrum.

The coupling entry between two elements is the unnormalized sinc
sin(x)/x evaluated at x = 2*pi*distance/wavelength (the 2*pi already lives in
the argument, so the normalized convention would double-count pi; a flag is
kept for sensitivity studies).  With unit-modulus excitation the correlation
matrix Q = (C I)(C I)^H collapses to C C^T exactly, which downstream code
exploits as a test invariant, not as a shortcut.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ArrayGeometry, pairwise_distances

#: eigenvalues above -PSD_CLAMP_REL * max(eig) are clamped to zero
PSD_CLAMP_REL = 1e-10


def coupling_matrix(geometry: ArrayGeometry, wavelength_m: float,
                    convention: str = "unnormalized") -> np.ndarray:
    """Real symmetric coupling matrix with unit diagonal."""
    if wavelength_m <= 0:
        raise ValueError("wavelength must be positive")
    d = pairwise_distances(geometry.positions)
    if convention == "unnormalized":
        # np.sinc(y) = sin(pi*y)/(pi*y); picking y = 2 d / lambda yields
        # sin(2 pi d / lambda) / (2 pi d / lambda) with the correct limit at 0.
        c = np.sinc(2.0 * d / wavelength_m)
    elif convention == "normalized":
        c = np.sinc(2.0 * np.pi * d / wavelength_m)
    else:
        raise ValueError(f"unknown sinc convention {convention!r}")
    np.fill_diagonal(c, 1.0)
    return 0.5 * (c + c.T)


def excitation_phases(m: int, rng: np.random.Generator) -> np.ndarray:
    """Diagonal of the excitation matrix: unit-modulus entries, phases U[0, 2pi)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    theta = rng.uniform(0.0, 2.0 * np.pi, size=m)
    return np.exp(1j * theta)


def correlation_matrix(c: np.ndarray, i_diag: np.ndarray) -> np.ndarray:
    """Q = (C I)(C I)^H, re-hermitized against roundoff."""
    r = combined_matrix(c, i_diag)
    q = r @ r.conj().T
    return 0.5 * (q + q.conj().T)


def combined_matrix(c: np.ndarray, i_diag: np.ndarray) -> np.ndarray:
    """R = C I for diagonal excitation stored as a vector."""
    c = np.asarray(c)
    i_diag = np.asarray(i_diag)
    if c.shape[0] != c.shape[1] or c.shape[0] != i_diag.shape[0]:
        raise ValueError("dimension mismatch between C and I")
    return c * i_diag[None, :]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (descending, clamped nonnegative) and unitary eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def m(self) -> int:
        return self.eigenvalues.size


def hermitian_evd(q: np.ndarray) -> Spectrum:
    """Eigendecomposition of a Hermitian PSD matrix with a tiny-negative clamp.

    Eigenvalues below -PSD_CLAMP_REL * max(eig) indicate upstream corruption
    and raise; values in the clamp band are set to zero.
    """
    q = np.asarray(q)
    qh = 0.5 * (q + q.conj().T)
    w, u = np.linalg.eigh(qh)
    wmax = float(w.max()) if w.size else 0.0
    floor = -PSD_CLAMP_REL * max(wmax, 0.0)
    if np.any(w < floor):
        raise ValueError(
            f"significantly negative eigenvalue {w.min():.3e} (floor {floor:.3e})")
    w = np.clip(w, 0.0, None)
    order = np.argsort(w)[::-1]
    return Spectrum(np.ascontiguousarray(w[order]),
                    np.ascontiguousarray(u[:, order]))


def spectral_sum(spectrum: Spectrum, n: int) -> float:
    """Sum of the n-th powers of the eigenvalues."""
    return float(np.sum(spectrum.eigenvalues ** n))


def variance_sum(sigmas, n: int) -> float:
    """Sum of sigma_j^n over the interferers; entries are standard deviations.

    Callers holding variances pass their square roots.  Empty input (single
    user, no interference) returns 0.
    """
    s = np.asarray(sigmas, float)
    if s.size == 0:
        return 0.0
    return float(np.sum(s ** n))


@dataclass(frozen=True)
class CouplingModel:
    """Deterministic part of the channel: C, excitation, R = CI, Q = RR^H."""

    c: np.ndarray
    i_diag: np.ndarray
    r: np.ndarray
    q: np.ndarray
    spectrum: Spectrum

    @property
    def m(self) -> int:
        return self.c.shape[0]


def build_coupling_model(geometry: ArrayGeometry, wavelength_m: float,
                         rng: np.random.Generator | None = None,
                         i_diag: np.ndarray | None = None,
                         convention: str = "unnormalized") -> CouplingModel:
    """Assemble C, I, R, Q and the spectrum of Q for one scenario."""
    c = coupling_matrix(geometry, wavelength_m, convention)
    if i_diag is None:
        if rng is None:
            i_diag = np.ones(geometry.m, dtype=complex)
        else:
            i_diag = excitation_phases(geometry.m, rng)
    r = combined_matrix(c, i_diag)
    q = r @ r.conj().T
    q = 0.5 * (q + q.conj().T)
    return CouplingModel(c=c, i_diag=np.asarray(i_diag, complex), r=r, q=q,
                         spectrum=hermitian_evd(q))
