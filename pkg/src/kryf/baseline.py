"""Asymptotic baseline fits with even-odd staggering.

Chaotic Lanczos sequences grow linearly (with a 1/log n correction in one
spatial dimension), so the standard extrapolation baseline fits a prefix
b_1..b_{n_in} to

    b_n = alpha * n + gamma + gamma_star * (-1)^n            (linear)
    b_n = alpha * n / ln(n) + gamma + gamma_star * (-1)^n    (loglinear)

by ordinary least squares, then evaluates the fitted expression at n > n_in.
The loglinear window starts at n = 2 because n/ln(n) is singular at n = 1;
pipeline code always copies prefix values through verbatim, so the n = 1
entry of an extrapolated sequence never comes from the closed form.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularDesign
from .validation import check_lanczos_sequence

__all__ = ["FitParams", "fit_baseline", "extrapolate_baseline", "baseline_predict"]

FORMS = ("linear", "loglinear")


@dataclass(frozen=True)
class FitParams:
    alpha: float
    gamma: float
    gamma_star: float
    form: str
    residual: float = 0.0  # sum of squared residuals over the fit window


def _growth_term(n, form):
    n = np.asarray(n, dtype=np.float64)
    if form == "linear":
        return n
    # callers guarantee n >= 2 here
    return n / np.log(n)


def fit_baseline(b_prefix, form="linear"):
    """Least-squares fit of the staggered asymptotic form to a prefix.

    Parameters
    ----------
    b_prefix : the first n_in coefficients (length >= 4).
    form : "linear" or "loglinear"; loglinear restricts the window to n >= 2.

    Returns FitParams with the summed squared residual over the window.
    Raises SingularDesign when the prefix is too short or the design
    columns are collinear.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    b = check_lanczos_sequence(b_prefix, "b_prefix")
    if b.size < 4:
        raise SingularDesign(f"prefix length {b.size} < 4 (three parameters + 1)")
    n = np.arange(1, b.size + 1, dtype=np.float64)
    if form == "loglinear":
        n = n[1:]
        b = b[1:]
    design = np.column_stack([_growth_term(n, form), np.ones_like(n), (-1.0) ** n])
    coef, _, rank, _ = np.linalg.lstsq(design, b, rcond=None)
    if rank < 3:
        raise SingularDesign("design columns are collinear on this window")
    resid = float(np.sum((design @ coef - b) ** 2))
    return FitParams(
        alpha=float(coef[0]),
        gamma=float(coef[1]),
        gamma_star=float(coef[2]),
        form=form,
        residual=resid,
    )


def extrapolate_baseline(params, n_max):
    """Evaluate the fitted form at n = 1..n_max.

    For the loglinear form the n = 1 entry evaluates the growth term at
    n = 2 as a defined placeholder; every pipeline overwrites the prefix
    entries with the known inputs, so the placeholder is never consumed.
    The returned array is the raw evaluation and may contain non-positive
    values; chain construction clamps (and counts) those separately.
    """
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1, dtype=np.float64)
    growth = _growth_term(np.maximum(n, 2.0) if params.form == "loglinear" else n, params.form)
    return params.alpha * growth + params.gamma + params.gamma_star * (-1.0) ** n


def baseline_predict(b_prefix, target_length, form="linear"):
    """Fit on a prefix and return the length-T sequence with the prefix
    copied through verbatim and fitted values at n > n_in."""
    b = check_lanczos_sequence(b_prefix, "b_prefix")
    target_length = int(target_length)
    if target_length < b.size:
        raise ValueError("target_length must be >= prefix length")
    fit = fit_baseline(b, form=form)
    out = extrapolate_baseline(fit, target_length)
    out[: b.size] = b
    return out
