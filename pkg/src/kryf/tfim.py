"""Transverse-field Ising chain with a longitudinal integrability-breaking
field, and the operator-space Lanczos recursion that generates quantum
Lanczos sequences.

    H = sum_i J Z_i Z_{i+1} + g X_i + h Z_i        (open boundary)

Operators live in the flattened 2^L x 2^L matrix space with the
infinite-temperature Hilbert-Schmidt inner product
(A|B) = Tr(A^dag B) / Tr(1), under which the Pauli strings are orthonormal.
The Liouvillian acts as the commutator [H, .], evaluated with two dense
matrix products.  This dense backend is exact and sufficient up to L ~ 10.
"""

from dataclasses import dataclass

import numpy as np

from ._lanczos import BREAKDOWN_TOL, lanczos_iterate
from .exceptions import DimensionTooLarge

__all__ = [
    "TfimParams",
    "sample_tfim",
    "build_hamiltonian",
    "initial_operator",
    "liouvillian_apply",
    "lanczos_generate",
]

MAX_DENSE_SITES = 10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [0.0 + 1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

# Sampling ranges for the dimensionless couplings in the chaotic regime.
G_RANGE = (1.0, 2.0)
H_RANGE = (0.1, 1.0)


@dataclass(frozen=True)
class TfimParams:
    """Couplings of the chain; J is fixed to 1 and sets the energy unit.

    Chaotic-regime generation requires h != 0 (the longitudinal field breaks
    integrability); ``sample_tfim`` guarantees that.  Integrable parameter
    points are still constructible for oracle tests.
    """

    L: int
    g: float
    h: float
    J: float = 1.0

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")


def sample_tfim(rng_seed, L):
    """Draw g ~ U[1.0, 2.0] and h ~ U[0.1, 1.0], deterministic in the seed."""
    rng = np.random.default_rng(int(rng_seed))
    g = rng.uniform(*G_RANGE)
    h = rng.uniform(*H_RANGE)
    return TfimParams(L=int(L), g=float(g), h=float(h))


def _site_operator(op, site, L):
    """Kron product placing a single-site operator at the given site."""
    mat = np.array([[1.0]])
    for i in range(L):
        mat = np.kron(mat, op if i == site else np.eye(2))
    return mat


def build_hamiltonian(params, max_sites=MAX_DENSE_SITES):
    """Dense Hermitian TFIM Hamiltonian (2^L x 2^L, real symmetric)."""
    L = params.L
    if L > max_sites:
        raise DimensionTooLarge(
            f"L = {L} exceeds the dense backend limit of {max_sites} sites"
        )
    dim = 2**L
    ham = np.zeros((dim, dim))
    z_ops = [_site_operator(PAULI_Z, i, L) for i in range(L)]
    for i in range(L - 1):
        ham += params.J * (z_ops[i] @ z_ops[i + 1])
    for i in range(L):
        ham += params.g * _site_operator(PAULI_X, i, L)
        ham += params.h * z_ops[i]
    return ham


def initial_operator(L, site=0):
    """Pauli Z on one site: unit norm under (A|B) = Tr(A^dag B)/Tr(1)."""
    return _site_operator(PAULI_Z, site, int(L)).astype(complex)


def liouvillian_apply(ham, op):
    """Commutator [H, O] = HO - OH on matrix-shaped operators."""
    return ham @ op - op @ ham


def lanczos_generate(params, n_steps, initial=None, breakdown_tol=BREAKDOWN_TOL):
    """Lanczos coefficients and Krylov basis for a TFIM instance.

    Parameters
    ----------
    params : TfimParams.
    n_steps : number of coefficients T to generate.
    initial : optional initial operator as a (2^L, 2^L) matrix; defaults to
        Z on the first site, which is already unit-norm.

    Returns
    -------
    (b, basis) : b of shape (T,); basis of shape (T+1, 4^L) holding the
    flattened Krylov operators, orthonormal under the Hilbert-Schmidt inner
    product (rows are scaled so plain complex dot products realize it).

    Raises
    ------
    LanczosBreakdown when the Krylov space is exhausted before T steps,
    which is possible at small L; the caller should discard or resample.
    """
    ham = build_hamiltonian(params)
    dim = ham.shape[0]
    if initial is None:
        initial = initial_operator(params.L)
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != ham.shape:
        raise ValueError("initial operator dimension does not match Hamiltonian")

    # Euclidean dot on vec(O)/sqrt(dim) equals the normalized HS inner product.
    scale = 1.0 / np.sqrt(dim)

    def apply_op(vec):
        op = vec.reshape(dim, dim)
        return liouvillian_apply(ham, op).reshape(-1)

    return lanczos_iterate(apply_op, initial.reshape(-1) * scale, n_steps, breakdown_tol)
