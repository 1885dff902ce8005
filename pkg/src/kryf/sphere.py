"""Polynomial algebra on the unit sphere for a single classical spin.

Observables are real polynomials in the spin components (x, y, z), reduced
modulo the constraint x^2 + y^2 + z^2 = 1.  The canonical form keeps a map
from exponent triples (a, b, c) with c in {0, 1} to real coefficients;
higher powers of z are eliminated through z^2 = 1 - x^2 - y^2.  That
substitution is compatible with the Poisson structure because the radius
is a Casimir of the fundamental brackets

    {x, y} = z,   {y, z} = x,   {z, x} = y.

The uniform-measure inner product reduces to exact monomial moments

    <x^(2a) y^(2b) z^(2c)> = (2a-1)!! (2b-1)!! (2c-1)!! / (2a+2b+2c+1)!!

and vanishes when any exponent is odd.

This representation is exact but numerically usable only at modest degree:
monomials on the sphere become severely ill-conditioned as the degree
grows, so production sequence generation (see ``kryf.classical``) runs in
an orthonormal harmonic basis instead and uses this module as its
low-degree cross-check.
"""

from math import prod

import numpy as np

__all__ = [
    "SpherePolynomial",
    "poisson_bracket",
    "sphere_inner",
    "xyz_hamiltonian",
]

PRUNE_TOL = 1e-15


def _double_factorial(n):
    # (-1)!! = 1 by convention
    return prod(range(n, 0, -2)) if n > 0 else 1


def _monomial_moment(a, b, c):
    """Sphere average of x^a y^b z^c; zero unless all exponents are even."""
    if a % 2 or b % 2 or c % 2:
        return 0.0
    num = _double_factorial(a - 1) * _double_factorial(b - 1) * _double_factorial(c - 1)
    return num / _double_factorial(a + b + c + 1)


class SpherePolynomial:
    """Real polynomial in (x, y, z) in canonical form (z-power <= 1)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None, *, _canonical=False):
        if terms is None:
            self.terms = {}
        elif _canonical:
            self.terms = dict(terms)
        else:
            self.terms = _canonicalize(terms)

    @classmethod
    def variable(cls, name):
        exps = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}[name]
        return cls({exps: 1.0}, _canonical=True)

    @classmethod
    def constant(cls, value):
        return cls({(0, 0, 0): float(value)} if value else {}, _canonical=True)

    @property
    def degree(self):
        return max((sum(k) for k in self.terms), default=0)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return SpherePolynomial(_prune(out), _canonical=True)

    def __sub__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) - v
        return SpherePolynomial(_prune(out), _canonical=True)

    def __mul__(self, other):
        if isinstance(other, SpherePolynomial):
            out = {}
            for (a1, b1, c1), v1 in self.terms.items():
                for (a2, b2, c2), v2 in other.terms.items():
                    k = (a1 + a2, b1 + b2, c1 + c2)
                    out[k] = out.get(k, 0.0) + v1 * v2
            return SpherePolynomial(out)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, factor):
        factor = float(factor)
        return SpherePolynomial(
            _prune({k: factor * v for k, v in self.terms.items()}), _canonical=True
        )

    def evaluate(self, x, y, z):
        return sum(v * x**a * y**b * z**c for (a, b, c), v in self.terms.items())

    def __repr__(self):
        if not self.terms:
            return "SpherePolynomial(0)"
        bits = []
        for (a, b, c), v in sorted(self.terms.items()):
            mono = "".join(s * e for s, e in zip("xyz", (a, b, c)))
            bits.append(f"{v:+g}{mono}")
        return f"SpherePolynomial({' '.join(bits)})"


def _prune(terms):
    return {k: v for k, v in terms.items() if abs(v) > PRUNE_TOL}


def _canonicalize(terms):
    """Eliminate z-powers >= 2 via z^2 = 1 - x^2 - y^2, then prune."""
    out = {}
    stack = list(terms.items())
    while stack:
        (a, b, c), v = stack.pop()
        if v == 0.0:
            continue
        if c < 2:
            key = (a, b, c)
            out[key] = out.get(key, 0.0) + v
        else:
            stack.append(((a, b, c - 2), v))
            stack.append(((a + 2, b, c - 2), -v))
            stack.append(((a, b + 2, c - 2), -v))
    return _prune(out)


def _partials(poly):
    """Formal partial derivatives (d/dx, d/dy, d/dz) of a canonical polynomial."""
    dx, dy, dz = {}, {}, {}
    for (a, b, c), v in poly.terms.items():
        if a:
            k = (a - 1, b, c)
            dx[k] = dx.get(k, 0.0) + a * v
        if b:
            k = (a, b - 1, c)
            dy[k] = dy.get(k, 0.0) + b * v
        if c:
            k = (a, b, c - 1)
            dz[k] = dz.get(k, 0.0) + c * v
    return (
        SpherePolynomial(dx, _canonical=True),
        SpherePolynomial(dy, _canonical=True),
        SpherePolynomial(dz, _canonical=True),
    )


_X = SpherePolynomial({(1, 0, 0): 1.0}, _canonical=True)
_Y = SpherePolynomial({(0, 1, 0): 1.0}, _canonical=True)
_Z = SpherePolynomial({(0, 0, 1): 1.0}, _canonical=True)


def poisson_bracket(f, g):
    """{f, g} generated by the fundamental spin brackets.

    Expanded through the Leibniz rule as r . (grad f x grad g); bilinear and
    antisymmetric, and the result is re-canonicalized.
    """
    fx, fy, fz = _partials(f)
    gx, gy, gz = _partials(g)
    return (
        _X * (fy * gz - fz * gy)
        + _Y * (fz * gx - fx * gz)
        + _Z * (fx * gy - fy * gx)
    )


def sphere_inner(f, g):
    """Normalized sphere-average inner product (f|g), exact via moments."""
    total = 0.0
    for (a1, b1, c1), v1 in f.terms.items():
        for (a2, b2, c2), v2 in g.terms.items():
            m = _monomial_moment(a1 + a2, b1 + b2, c1 + c2)
            if m:
                total += v1 * v2 * m
    return total


def xyz_hamiltonian(jx, jy, jz):
    """H = Jx x^2 + Jy y^2 + Jz z^2 in canonical form."""
    return SpherePolynomial(
        {(2, 0, 0): float(jx), (0, 2, 0): float(jy), (0, 0, 2): float(jz)}
    )


def gram_schmidt_lanczos(hamiltonian, n_steps, breakdown_tol=1e-10):
    """Reference Lanczos recursion directly on SpherePolynomial objects.

    Exact arithmetic on the monomial representation, usable only for small
    n_steps (the monomial Gram matrix is exponentially ill-conditioned in
    the degree); serves as the low-degree oracle for the harmonic backend.
    """
    from .exceptions import LanczosBreakdown

    o0 = _Z.scale(np.sqrt(3.0))  # (z|z) = 1/3, so sqrt(3) z has unit norm
    basis = [o0]
    b = []
    for n in range(1, n_steps + 1):
        a = poisson_bracket(hamiltonian, basis[n - 1])
        if n >= 2:
            a = a - basis[n - 2].scale(b[-1])
        for _ in range(2):
            for q in basis:
                a = a - q.scale(sphere_inner(q, a))
        bn = np.sqrt(max(sphere_inner(a, a), 0.0))
        if bn < breakdown_tol:
            raise LanczosBreakdown(n, bn)
        b.append(float(bn))
        basis.append(a.scale(1.0 / bn))
    return np.array(b), basis
