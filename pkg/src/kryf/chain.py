"""Krylov-chain dynamics from Lanczos coefficients.

A length-T sequence of positive hopping amplitudes b_1..b_T defines a
(T+1)-site tight-binding chain whose Hamiltonian is the symmetric,
zero-diagonal tridiagonal matrix with b on the off-diagonals.  Evolving
the initial state e_0 under exp(i L t) gives the chain wavefunction
phi_n(t), from which the complexity K(t) = sum_n n |phi_n|^2 and the
return amplitude C(t) = phi_0(t) follow.

The semi-infinite chain is truncated with a hard wall after the last
known coefficient; reconstructions from truth and from extrapolations
share the same truncation, so comparisons between them are fair.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .exceptions import NonPositiveCoefficient, NonPositiveSquare
from .validation import as_float_array, check_increment_sequence, check_lanczos_sequence

__all__ = [
    "to_increments",
    "from_increments",
    "build_tridiagonal",
    "evolve",
    "krylov_complexity",
    "autocorrelation",
    "ObservableSeries",
    "observable_series",
    "moments_from_tridiagonal",
    "moments_to_lanczos",
]

logger = logging.getLogger(__name__)

# Recommended ceiling for the moment recursion; it loses roughly one digit
# per step and cannot be trusted much beyond this length in double precision.
MAX_MOMENT_LENGTH = 12


def to_increments(b):
    """Differences d_n = b_n - b_{n-1} with the convention b_0 = 0."""
    b = check_lanczos_sequence(b)
    return np.diff(b, prepend=0.0)


def from_increments(d):
    """Cumulative sum b_n = sum_{j<=n} d_j.

    Raises NonPositiveCoefficient if any partial sum is <= 0, which signals
    an invalid extrapolation rather than a programming error.
    """
    d = check_increment_sequence(d)
    return np.cumsum(d)


def build_tridiagonal(b, clamp=None):
    """Dense (T+1)x(T+1) symmetric zero-diagonal matrix with b off-diagonal.

    Parameters
    ----------
    b : array of T coefficients.  Must be strictly positive unless `clamp`
        is given, in which case entries <= 0 are replaced by `clamp` and a
        warning is logged (used when reconstructing dynamics from raw
        extrapolations that may dip below zero).
    """
    if clamp is not None:
        b = as_float_array(b, "b")
        bad = b <= 0.0
        if bad.any():
            logger.warning(
                "clamping %d non-positive coefficient(s) to %g", int(bad.sum()), clamp
            )
            b = np.where(bad, clamp, b)
    else:
        b = check_lanczos_sequence(b)
    n = b.size + 1
    mat = np.zeros((n, n))
    idx = np.arange(b.size)
    mat[idx, idx + 1] = b
    mat[idx + 1, idx] = b
    return mat


def _chain_eig(b):
    """Eigendecomposition of the zero-diagonal tridiagonal chain."""
    b = np.asarray(b, dtype=np.float64)
    if b.size == 0:
        raise ValueError("need at least one coefficient")
    lam, vec = eigh_tridiagonal(np.zeros(b.size + 1), b)
    return lam, vec


def evolve(b, t, clamp=None):
    """Chain wavefunction phi(t) = exp(i L t) e_0.

    Computed by eigendecomposition of the real symmetric tridiagonal matrix,
    which is exact to machine precision for any t and conserves the norm.

    Parameters
    ----------
    b : off-diagonal coefficients (length T).
    t : time, a finite nonnegative real.
    clamp : optional replacement for non-positive entries, see
        ``build_tridiagonal``.

    Returns
    -------
    phi : complex array of length T+1 with sum |phi_n|^2 = 1.
    """
    if clamp is not None:
        b = np.asarray(b, dtype=np.float64)
        b = np.where(b <= 0.0, clamp, b)
    else:
        b = check_lanczos_sequence(b)
    if t == 0.0:  # exp(i L 0) = identity: keep phi(0) = e_0 exact
        phi = np.zeros(b.size + 1, dtype=complex)
        phi[0] = 1.0
        return phi
    lam, vec = _chain_eig(b)
    # phi = V exp(i lam t) V^T e_0
    return vec @ (np.exp(1j * lam * float(t)) * vec[0, :])


def krylov_complexity(phi):
    """Mean chain position K = sum_n n |phi_n|^2."""
    phi = np.asarray(phi)
    return float(np.arange(phi.size) @ np.abs(phi) ** 2)


def autocorrelation(phi):
    """Return amplitude at the chain origin, C = phi_0.

    The value is returned unclipped; for zero-diagonal chains its imaginary
    part stays below 1e-9 because the spectrum is symmetric under
    lambda -> -lambda.
    """
    return complex(np.asarray(phi)[0])


@dataclass(frozen=True)
class ObservableSeries:
    """K(t) and C(t) sampled on a shared time grid."""

    times: np.ndarray
    complexity: np.ndarray
    autocorrelation: np.ndarray


def observable_series(b, times, clamp=None):
    """Evaluate K(t) and C(t) on a time grid with one eigendecomposition.

    ``clamp`` behaves as in ``build_tridiagonal``; pass e.g. 1e-8 when the
    coefficients come from an extrapolation that may contain non-positive
    values.
    """
    times = as_float_array(times, "times")
    if np.any(times < 0.0):
        raise ValueError("times must be nonnegative")
    if clamp is not None:
        b = np.asarray(b, dtype=np.float64)
        b = np.where(b <= 0.0, clamp, b)
    else:
        b = check_lanczos_sequence(b)
    lam, vec = _chain_eig(b)
    w0 = vec[0, :]
    # phases[k, j] = exp(i lam_j t_k)
    phases = np.exp(1j * np.outer(times, lam))
    phi = phases * w0 @ vec.T  # (n_times, T+1)
    weights = np.abs(phi) ** 2
    k_curve = weights @ np.arange(b.size + 1)
    c_curve = phi[:, 0].copy()
    at_zero = times == 0.0  # phi(0) = e_0 exactly
    k_curve[at_zero] = 0.0
    c_curve[at_zero] = 1.0
    return ObservableSeries(times=times, complexity=k_curve, autocorrelation=c_curve)


def moments_from_tridiagonal(b, n_moments):
    """Even spectral moments mu_{2k} = (e_0, L^{2k} e_0) for k = 0..n_moments.

    Uses mu_{2k} = ||L^k e_0||^2, one tridiagonal matvec per moment.
    """
    b = check_lanczos_sequence(b)
    n_moments = int(n_moments)
    if n_moments < 0:
        raise ValueError("n_moments must be >= 0")
    w = np.zeros(b.size + 1)
    w[0] = 1.0
    mu = np.empty(n_moments + 1)
    mu[0] = 1.0
    for k in range(1, n_moments + 1):
        w = _tridiagonal_matvec(b, w)
        mu[k] = w @ w
    return mu


def _tridiagonal_matvec(b, w):
    out = np.zeros_like(w)
    out[:-1] += b * w[1:]
    out[1:] += b * w[:-1]
    return out


def moments_to_lanczos(mu, max_length=MAX_MOMENT_LENGTH):
    """Recover b_1..b_M from the even moments mu_0, mu_2, .., mu_{2M}.

    Standard recursion on auxiliary rows M_k^{(n)}:

        M_k^{(0)}  = mu_{2k},    M_k^{(-1)} = 0,    b_{-1} = b_0 = 1
        M_k^{(n)}  = M_k^{(n-1)} / b_{n-1}^2  -  M_{k-1}^{(n-2)} / b_{n-2}^2
        b_n        = sqrt(M_n^{(n)})

    The recursion terminates early (returning a shorter sequence) when
    M_n^{(n)} vanishes to rounding, meaning the Krylov space is exhausted.
    It raises NonPositiveSquare when M_n^{(n)} is genuinely negative, which
    signals invalid or noisy moments.  Lengths beyond ``max_length`` are
    rejected: the recursion loses accuracy rapidly and results past ~12
    coefficients are not trustworthy in double precision.
    """
    mu = as_float_array(mu, "mu")
    if mu.size < 1 or abs(mu[0] - 1.0) > 1e-12:
        raise ValueError("mu must start with mu_0 = 1")
    n_target = mu.size - 1
    if n_target > max_length:
        raise ValueError(
            f"moment recursion limited to {max_length} coefficients "
            f"(requested {n_target}); it is numerically unstable beyond that"
        )
    row_prev = mu.copy()          # M^{(n-1)}, starts as M^{(0)}
    row_prev2 = np.zeros_like(mu)  # M^{(n-2)}, starts as M^{(-1)}
    b2_prev = 1.0                  # b_{n-1}^2
    b2_prev2 = 1.0                 # b_{n-2}^2
    out = []
    for n in range(1, n_target + 1):
        row = np.full(mu.size, np.nan)
        ks = np.arange(n, n_target + 1)
        term1 = row_prev[ks] / b2_prev
        term2 = row_prev2[ks - 1] / b2_prev2
        row[ks] = term1 - term2
        bn2 = row[n]
        if bn2 <= 0.0:
            scale = abs(term1[0]) + abs(term2[0])
            if abs(bn2) <= 1e-10 * max(scale, 1.0):
                break  # exhausted: remaining coefficients are identically zero
            raise NonPositiveSquare(
                f"moment recursion produced b_{n}^2 = {bn2:.6e} (invalid moments)"
            )
        out.append(np.sqrt(bn2))
        row_prev2, row_prev = row_prev, row
        b2_prev2, b2_prev = b2_prev, bn2
    if not out:
        raise NonPositiveCoefficient("moments yield an empty coefficient sequence")
    return np.array(out)
