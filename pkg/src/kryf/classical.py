"""Classical Lanczos sequences for the XYZ spin top.

The Liouvillian is the Poisson bracket with H = Jx x^2 + Jy y^2 + Jz z^2,
and sequences are generated to T = 100 and beyond.  At those lengths the
Krylov operators are polynomials of degree ~T, where the monomial
representation of ``kryf.sphere`` is hopelessly ill-conditioned.  The
production path therefore works in coefficients over an orthonormal
harmonic basis (unit-normalized spherical harmonics scaled so that the
normalized sphere average is a plain dot product):

  * multiplication by x, y, z couples harmonic degrees l -> l +- 1 through
    the standard three-term recurrences,
  * the bracket generators {x_i, .} are the rotation generators, acting
    within fixed l through the angular-momentum ladder formulas,
  * the Liouvillian {H, .} = sum_i 2 J_i x_i {x_i, .} is their sparse
    composition.

Coefficient vectors stay O(1), inner products are exact dot products, and
two-pass Gram-Schmidt keeps the basis orthonormal to ~1e-14 at T = 100.
The low-degree monomial implementation doubles as an independent oracle.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ._lanczos import BREAKDOWN_TOL, lanczos_iterate

__all__ = [
    "XyzParams",
    "sample_xyz",
    "lanczos_generate_classical",
    "harmonic_dimension",
    "harmonic_index",
    "harmonic_degree",
    "liouvillian_matrix",
]


@dataclass(frozen=True)
class XyzParams:
    """Couplings of H = Jx x^2 + Jy y^2 + Jz z^2."""

    Jx: float
    Jy: float
    Jz: float


def sample_xyz(rng_seed):
    """Three independent U[0, 1] draws, deterministic in the seed."""
    rng = np.random.default_rng(int(rng_seed))
    jx, jy, jz = rng.uniform(0.0, 1.0, size=3)
    return XyzParams(Jx=float(jx), Jy=float(jy), Jz=float(jz))


def harmonic_index(l, m):
    """Position of the (l, m) harmonic in the flattened coefficient vector."""
    return l * l + (m + l)


def harmonic_dimension(lmax):
    return (lmax + 1) ** 2


def harmonic_degree(vec, tol=1e-12):
    """Largest harmonic degree l carrying weight above tol."""
    vec = np.asarray(vec)
    lmax = int(np.sqrt(vec.size)) - 1
    for l in range(lmax, -1, -1):
        if np.abs(vec[l * l : (l + 1) * (l + 1)]).max() > tol:
            return l
    return 0


@lru_cache(maxsize=8)
def _coordinate_and_rotation_operators(lmax):
    """Sparse multiplication operators Mx, My, Mz and bracket generators
    Dx, Dy, Dz = {x_i, .} on the degree-truncated harmonic space."""
    n = harmonic_dimension(lmax)
    mz = sp.lil_matrix((n, n))
    mp = sp.lil_matrix((n, n))  # multiplication by x + iy
    mm = sp.lil_matrix((n, n))  # multiplication by x - iy
    lz = sp.lil_matrix((n, n))
    lp = sp.lil_matrix((n, n))
    lm = sp.lil_matrix((n, n))
    for l in range(lmax + 1):
        two_l = 2 * l
        for m in range(-l, l + 1):
            j = harmonic_index(l, m)
            lz[j, j] = m
            if m + 1 <= l:
                lp[harmonic_index(l, m + 1), j] = np.sqrt((l - m) * (l + m + 1))
            if m - 1 >= -l:
                lm[harmonic_index(l, m - 1), j] = np.sqrt((l + m) * (l - m + 1))
            up = (two_l + 1) * (two_l + 3)
            down = (two_l - 1) * (two_l + 1)
            if l + 1 <= lmax:
                mz[harmonic_index(l + 1, m), j] = np.sqrt((l - m + 1) * (l + m + 1) / up)
                mp[harmonic_index(l + 1, m + 1), j] = -np.sqrt(
                    (l + m + 1) * (l + m + 2) / up
                )
                mm[harmonic_index(l + 1, m - 1), j] = np.sqrt(
                    (l - m + 1) * (l - m + 2) / up
                )
            if l - 1 >= 0:
                if abs(m) <= l - 1:
                    mz[harmonic_index(l - 1, m), j] = np.sqrt((l - m) * (l + m) / down)
                if abs(m + 1) <= l - 1:
                    mp[harmonic_index(l - 1, m + 1), j] = np.sqrt(
                        (l - m) * (l - m - 1) / down
                    )
                if abs(m - 1) <= l - 1:
                    mm[harmonic_index(l - 1, m - 1), j] = -np.sqrt(
                        (l + m) * (l + m - 1) / down
                    )
    mx = 0.5 * (mp + mm)
    my = -0.5j * (mp - mm)
    # {x_i, .} = -i L_i with the quantum-convention angular momentum.
    dx = -0.5j * (lp + lm)
    dy = -0.5 * (lp - lm)
    dz = -1j * lz
    csr = lambda a: a.tocsr().astype(complex)
    return (csr(mx), csr(my), csr(mz)), (csr(dx), csr(dy), csr(dz))


@lru_cache(maxsize=8)
def _coupling_generators(lmax):
    """The three sparse blocks 2 M_i D_i whose J-weighted sum is {H, .}."""
    (mx, my, mz), (dx, dy, dz) = _coordinate_and_rotation_operators(lmax)
    return (2.0 * (mx @ dx)).tocsr(), (2.0 * (my @ dy)).tocsr(), (2.0 * (mz @ dz)).tocsr()


def liouvillian_matrix(params, lmax):
    """Sparse {H, .} for the given couplings on the truncated harmonic space."""
    gx, gy, gz = _coupling_generators(lmax)
    return (params.Jx * gx + params.Jy * gy + params.Jz * gz).tocsr()


def lanczos_generate_classical(
    params, n_steps, breakdown_tol=BREAKDOWN_TOL, return_basis=False
):
    """Classical Lanczos coefficients from O_0 = sqrt(3) z.

    The normalization follows from (z|z) = 1/3 under the sphere average.
    Full two-pass reorthogonalization is applied at every step.  Raises
    LanczosBreakdown when {H, .} annihilates the current operator, e.g. for
    Jx = Jy = Jz where H is constant on the sphere.

    Returns the coefficient array, or (coefficients, basis) with
    ``return_basis=True`` where basis rows are harmonic coefficient vectors.
    """
    n_steps = int(n_steps)
    lmax = n_steps + 2  # degree(O_n) <= n + 1, plus one for the final apply
    op = liouvillian_matrix(params, lmax)
    v0 = np.zeros(harmonic_dimension(lmax), dtype=complex)
    v0[harmonic_index(1, 0)] = 1.0  # sqrt(3) z in the orthonormal basis
    b, basis = lanczos_iterate(lambda v: op @ v, v0, n_steps, breakdown_tol)
    if return_basis:
        return b, basis
    return b
