"""Truncated exponential baseline model.

The incubation distribution is modeled as an exponential with scale ``a``
truncated to [0, m1]:

    F_a(x) = (1 - exp(-x/a)) / (1 - exp(-m1/a)),  0 <= x <= m1.

Day-band integrals of F_a have closed forms, so the observed-data likelihood
of singly censored records is a cheap one-parameter function maximized by
golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SINGLE, Dataset


@dataclass(frozen=True)
class TruncExpParams:
    a: float
    m1: int

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("scale a must be positive")
        if self.m1 < 1:
            raise ValueError("truncation day m1 must be >= 1")


def trunc_exp_cdf(x, params: TruncExpParams):
    """F_a evaluated at x (scalar or array), 0 below 0 and 1 above m1."""
    x = np.asarray(x, dtype=float)
    body = -np.expm1(-np.clip(x, 0.0, params.m1) / params.a)
    out = body / -math.expm1(-params.m1 / params.a)
    out = np.where(x <= 0.0, 0.0, np.where(x >= params.m1, 1.0, out))
    return float(out) if out.ndim == 0 else out


def trunc_exp_fbar(k: int, params: TruncExpParams) -> float:
    """Integral of F_a over the day band (k-1, k], for integer k.

    For 1 <= k <= m1 this is (1 - a e^{-k/a}(e^{1/a} - 1)) / (1 - e^{-m1/a});
    bands below day 1 integrate to 0 and bands above m1 to 1.
    """
    if k <= 0:
        return 0.0
    if k > params.m1:
        return 1.0
    a = params.a
    # a e^{-k/a}(e^{1/a} - 1) written as -a e^{-(k-1)/a} expm1(-1/a) so that
    # small a underflows to 0 instead of overflowing expm1
    numer = 1.0 + a * math.exp(-(k - 1.0) / a) * math.expm1(-1.0 / a)
    return numer / -math.expm1(-params.m1 / a)


def day_band_integral(k: int, e: int, params: TruncExpParams) -> float:
    """Integral of F_a(s) - F_a(s - e) over the day band (k-1, k].

    This is the parametric probability that onset falls on day k for a
    record with exposure window length e; for e >= k the shifted term
    vanishes and only the single band integral remains.
    """
    return trunc_exp_fbar(k, params) - trunc_exp_fbar(k - e, params)


def _band_vector(k: np.ndarray, a: float, m1: int) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    numer = 1.0 + a * np.exp(-(np.clip(k, 1.0, m1) - 1.0) / a) * math.expm1(-1.0 / a)
    body = numer / -math.expm1(-m1 / a)
    return np.where(k <= 0.0, 0.0, np.where(k > m1, 1.0, body))


def trunc_exp_loglik(a: float, data: Dataset, m1: int) -> float:
    """Sum of log day-band probabilities; -inf if any record has probability 0."""
    if data.mode != SINGLE:
        raise ValueError("the parametric baseline handles single mode data only")
    probs = _band_vector(data.s, a, m1) - _band_vector(data.s - data.e, a, m1)
    if np.any(probs <= 0.0):
        return -np.inf
    return float(np.sum(np.log(probs)))


@dataclass(frozen=True)
class TruncExpFit:
    a: float
    loglik: float
    at_bracket_edge: bool


def _golden_max(fun, lo: float, hi: float, xatol: float = 1e-8) -> float:
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > xatol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def fit_trunc_exp(
    data: Dataset, m1: int, bracket: tuple[float, float] = (0.01, 100.0)
) -> TruncExpFit:
    """One-dimensional maximum likelihood for the scale a.

    A 50-point log-spaced scan localizes the mode inside the bracket, then
    golden-section search refines it to absolute tolerance 1e-8.  The result
    is flagged when the maximum sits at a bracket edge, where the model is
    effectively degenerate.
    """
    lo, hi = bracket
    if not (0.0 < lo < hi):
        raise ValueError("bracket must satisfy 0 < lo < hi")
    scan = np.geomspace(lo, hi, 50)
    values = np.array([trunc_exp_loglik(a, data, m1) for a in scan])
    best = int(np.argmax(values))
    left = scan[max(best - 1, 0)]
    right = scan[min(best + 1, scan.size - 1)]
    a_hat = _golden_max(lambda a: trunc_exp_loglik(a, data, m1), left, right)
    at_edge = (a_hat - lo) < 50e-8 or (hi - a_hat) < 50e-8
    return TruncExpFit(
        a=float(a_hat),
        loglik=trunc_exp_loglik(float(a_hat), data, m1),
        at_bracket_edge=bool(at_edge),
    )
