"""Deterministic seed derivation.

A splitmix64-style hash turns (master seed, index...) tuples into
independent child seeds, so datasets and training runs are reproducible
and stable under parallel generation order.
"""

__all__ = ["splitmix64", "derive_seed"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state):
    """One splitmix64 output step for a 64-bit state."""
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master, *indices):
    """Child seed from a master seed and any number of integer indices."""
    seed = splitmix64(int(master) & _MASK)
    for ix in indices:
        seed = splitmix64(seed ^ ((int(ix) & _MASK) * _GOLDEN & _MASK))
    return seed
