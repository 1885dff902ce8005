"""Shared Lanczos iteration with full reorthogonalization.

Operates on plain complex vectors under the Euclidean inner product; the
quantum and classical front ends map their operator spaces onto such
vectors (Hilbert-Schmidt-scaled flattened matrices, orthonormal harmonic
coefficients) so one iteration body serves both.
"""

import numpy as np

from .exceptions import LanczosBreakdown

BREAKDOWN_TOL = 1e-10


def lanczos_iterate(apply_op, v0, n_steps, breakdown_tol=BREAKDOWN_TOL):
    """Run n_steps of the Lanczos recursion b_n, O_n from O_0 = v0.

        A_n = op(O_{n-1}) - b_{n-1} O_{n-2}
        b_n = ||A_n||,   O_n = A_n / b_n

    with two passes of classical Gram-Schmidt against all stored basis
    vectors at every step (full reorthogonalization).

    Parameters
    ----------
    apply_op : callable mapping a vector to op @ vector.
    v0 : starting vector, normalized to unit Euclidean norm internally.
    n_steps : number of coefficients to produce.

    Returns
    -------
    (b, basis) : coefficients of shape (n_steps,) and orthonormal basis of
    shape (n_steps + 1, dim) whose rows are O_0..O_n.

    Raises
    ------
    LanczosBreakdown if some b_n falls below ``breakdown_tol``; the Krylov
    space is exhausted and the sequence should be truncated or discarded.
    """
    v0 = np.asarray(v0)
    n_steps = int(n_steps)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    norm0 = np.sqrt(np.vdot(v0, v0).real)
    if norm0 < breakdown_tol:
        raise ValueError("starting vector has (near-)zero norm")
    basis = np.zeros((n_steps + 1, v0.size), dtype=complex)
    basis[0] = v0 / norm0
    b = np.zeros(n_steps)
    for n in range(1, n_steps + 1):
        a = apply_op(basis[n - 1])
        if n >= 2:
            a = a - b[n - 2] * basis[n - 2]
        for _ in range(2):
            coef = basis[:n].conj() @ a
            a = a - basis[:n].T @ coef
        bn = np.sqrt(np.vdot(a, a).real)
        if bn < breakdown_tol:
            raise LanczosBreakdown(n, bn)
        b[n - 1] = bn
        basis[n] = a / bn
    return b, basis
