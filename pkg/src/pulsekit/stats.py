"""Hypothesis tests used in the transit-time analysis.

Shapiro-Wilk, Bartlett and Kruskal-Wallis wrap scipy.stats. The Wilcoxon
signed-rank test is implemented here: the exact route conditions on the
observed midranks (ties allowed), which scipy's exact method does not do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sst

from .errors import AllTiedError, InsufficientDataError, SampleTooSmallError, ValidationError

__all__ = [
    "TestResult",
    "bonferroni",
    "shapiro_wilk",
    "bartlett",
    "kruskal_wallis",
    "wilcoxon_signed_rank",
]

# exact Wilcoxon distribution up to this many nonzero differences
WILCOXON_EXACT_MAX_N = 25


@dataclass
class TestResult:
    __test__ = False  # not a pytest case, despite the name

    name: str
    statistic: float
    p: float
    alpha_corrected: float
    significant: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p": self.p,
            "alpha_corrected": self.alpha_corrected,
            "significant": self.significant,
        }


def _result(name: str, statistic: float, p: float, alpha: float) -> TestResult:
    p = float(min(max(p, 0.0), 1.0))
    return TestResult(name, float(statistic), p, alpha, bool(p < alpha))


def bonferroni(alpha: float, m: int) -> float:
    """Per-test threshold alpha / m for m simultaneous tests."""
    if not (0 < alpha <= 1):
        raise ValidationError(f"alpha must be in (0, 1], got {alpha}")
    if m < 1:
        raise ValidationError(f"number of tests must be >= 1, got {m}")
    return alpha / m


def shapiro_wilk(x, alpha: float = 0.05, name: str = "shapiro") -> TestResult:
    """Shapiro-Wilk normality test (AS R94 approximation), 3 <= n <= 5000."""
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        raise SampleTooSmallError(f"Shapiro-Wilk needs n >= 3, got {x.size}")
    if x.size > 5000:
        raise ValidationError(
            f"Shapiro-Wilk approximation only valid up to n = 5000, got {x.size}"
        )
    if np.ptp(x) == 0.0:
        raise AllTiedError("all observations identical")
    stat, p = sst.shapiro(x)
    return _result(name, stat, p, alpha)


def bartlett(groups, alpha: float = 0.05, name: str = "bartlett") -> TestResult:
    """Bartlett's equal-variance test across groups (chi-square p)."""
    arrs = [np.asarray(g, dtype=float) for g in groups]
    if len(arrs) < 2:
        raise InsufficientDataError("Bartlett needs at least 2 groups")
    for g in arrs:
        if g.size < 2:
            raise SampleTooSmallError("Bartlett needs >= 2 observations per group")
        if np.var(g) == 0.0:
            raise AllTiedError("a group has zero variance; Bartlett undefined")
    stat, p = sst.bartlett(*arrs)
    return _result(name, stat, p, alpha)


def kruskal_wallis(groups, alpha: float = 0.05, name: str = "kruskal") -> TestResult:
    """Kruskal-Wallis H (midranks, tie-corrected) with chi-square p."""
    arrs = [np.asarray(g, dtype=float) for g in groups]
    if len(arrs) < 2:
        raise InsufficientDataError("Kruskal-Wallis needs at least 2 groups")
    for g in arrs:
        if g.size < 1:
            raise SampleTooSmallError("empty group")
    try:
        stat, p = sst.kruskal(*arrs)
    except ValueError as exc:  # scipy rejects the all-identical case
        raise AllTiedError(str(exc)) from exc
    return _result(name, stat, p, alpha)


def _exact_wilcoxon_p(doubled: np.ndarray, w2: int) -> float:
    """Two-sided exact p conditioned on the observed (doubled) midranks.

    Enumerates the 2^n sign assignments by dynamic programming over the
    integer-valued doubled ranks; p = min(1, 2 * min tail).
    """
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for d in doubled:
        d = int(d)
        # copy keeps the convolution one-shot per rank (old values only)
        counts[d:] += counts[:-d].copy()
    n_assign = float(2 ** len(doubled))
    p_le = counts[: w2 + 1].sum() / n_assign
    p_ge = counts[w2:].sum() / n_assign
    return min(1.0, 2.0 * min(p_le, p_ge))


def wilcoxon_signed_rank(
    x, alpha: float = 0.05, name: str = "wilcoxon", mode: str = "auto"
) -> TestResult:
    """Two-sided Wilcoxon signed-rank test against a symmetric zero median.

    Exact zeros are discarded first (the original convention); absolute
    values are midranked. The statistic is W+, the sum of ranks of positive
    differences. ``mode`` selects the p-value route: "exact" (conditional
    enumeration, n <= 25), "approx" (normal with tie correction and
    continuity correction, n >= 6), or "auto".
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValidationError("wilcoxon expects a 1-D array of differences")
    x = x[x != 0.0]
    n = x.size
    if n == 0:
        raise AllTiedError("all differences are zero")
    if mode not in ("auto", "exact", "approx"):
        raise ValidationError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "exact" if n <= WILCOXON_EXACT_MAX_N else "approx"
    if mode == "exact" and n > WILCOXON_EXACT_MAX_N:
        raise ValidationError(
            f"exact distribution limited to n <= {WILCOXON_EXACT_MAX_N}, got {n}"
        )
    if mode == "approx" and n < 6:
        raise SampleTooSmallError(
            f"normal approximation unreliable below n = 6, got {n}"
        )

    ranks = sst.rankdata(np.abs(x))  # midranks
    w_plus = float(ranks[x > 0].sum())

    if mode == "exact":
        doubled = np.rint(2.0 * ranks).astype(np.int64)  # midranks are k/2
        p = _exact_wilcoxon_p(doubled, int(round(2.0 * w_plus)))
    else:
        mu = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var -= (tie_counts.astype(float) ** 3 - tie_counts).sum() / 48.0
        if var <= 0:
            raise AllTiedError("no rank variation; Wilcoxon undefined")
        d = w_plus - mu
        z = (d - 0.5 * np.sign(d)) / np.sqrt(var) if d != 0 else 0.0
        p = 2.0 * sst.norm.sf(abs(z))
    return _result(name, w_plus, p, alpha)
