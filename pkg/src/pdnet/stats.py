"""Replication statistics: sample summaries and Welch's two-sample t-test.

The test is unpaired, unequal-variance (Welch), two-tailed. The p-value
comes from the Student-t tail probability expressed through the regularized
incomplete beta function, P(|T| > t) = I_x(df/2, 1/2) with x = df/(df+t^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import betainc

__all__ = [
    "SampleSummary",
    "WelchResult",
    "summarize",
    "welch_t",
    "student_t_two_tailed_p",
    "significance_flag",
]


@dataclass(frozen=True)
class SampleSummary:
    """Mean and (n-1)-denominator standard deviation; sd is NaN for n = 1."""

    n: int
    mean: float
    sd: float


def summarize(samples: Sequence[float]) -> SampleSummary:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("summarize needs a nonempty 1-d sample")
    sd = float(np.std(x, ddof=1)) if x.size >= 2 else math.nan
    return SampleSummary(n=int(x.size), mean=float(x.mean()), sd=sd)


def student_t_two_tailed_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|), numerically stable far into the tail."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


class WelchResult(NamedTuple):
    t: float
    df: float
    p_two_tailed: float


def welch_t(sample_a: Sequence[float], sample_b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance t-test of mean(a) - mean(b).

    Degenerate inputs where both samples have zero variance are resolved by
    the means: equal means give (t=0, p=1), unequal means give an infinite
    t with p=0. Both samples need at least two observations.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("welch_t needs n >= 2 in both samples")
    mean_a, mean_b = float(a.mean()), float(b.mean())
    var_a = float(np.var(a, ddof=1))
    var_b = float(np.var(b, ddof=1))
    qa, qb = var_a / a.size, var_b / b.size
    se2 = qa + qb
    if se2 == 0.0:
        df = float(a.size + b.size - 2)
        if mean_a == mean_b:
            return WelchResult(0.0, df, 1.0)
        return WelchResult(math.copysign(math.inf, mean_a - mean_b), df, 0.0)
    t = (mean_a - mean_b) / math.sqrt(se2)
    # Welch-Satterthwaite in normalized form: with ra + rb = 1 the
    # denominator is at least 1/(4(n-1)), so extreme variance ratios
    # cannot underflow it to zero
    ra, rb = qa / se2, qb / se2
    df = 1.0 / (ra * ra / (a.size - 1) + rb * rb / (b.size - 1))
    return WelchResult(t, df, student_t_two_tailed_p(t, df))


def significance_flag(p_value: float) -> str:
    """'*' below 0.01, '+' below 0.05, otherwise empty."""
    if not 0.0 <= p_value <= 1.0:
        raise ValueError(f"p-value must be in [0, 1], got {p_value}")
    if p_value < 0.01:
        return "*"
    if p_value < 0.05:
        return "+"
    return ""
