"""Binomial square-root series ``sqrt(I - x)`` and half-angle recovery of cosine values.

For ``||x|| < 1`` the series ``sum_n (-1)^n alpha_n x^n`` (``alpha_n`` the
Taylor coefficients of ``sqrt(1 - z)`` up to sign) converges absolutely, and
its scalar majorant ``sum_{n>=1} |alpha_n| r^n = 1 - sqrt(1 - r)`` gives both a
certified truncation error and the bound ``||I - sqrt(I - x)|| <= 1 - sqrt(1 - ||x||)``.

Inverting the double-angle formula ``C(2s) = 2 C(s)^2 - I`` with this root gives
``C(s) = sqrt(I - (I - C(2s)) / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from coslaw.errors import NoConvergence, OutsideDisk
from coslaw.linalg_core import as_matrix, identity, operator_norm

DEFAULT_MARGIN = 1e-6
TAIL_TOL = 1e-14
MAX_TERMS = 200_000


@dataclass(frozen=True)
class BinomialCoefficients:
    alphas: tuple

    def __len__(self):
        return len(self.alphas)

    def __getitem__(self, n):
        return self.alphas[n]

    def series_coefficients(self) -> np.ndarray:
        """Coefficients ``(-1)^n alpha_n`` of ``z^n`` in ``sqrt(1 - z)``."""
        a = np.asarray(self.alphas)
        return a * (-1.0) ** np.arange(a.size)


@lru_cache(maxsize=32)
def _coeffs(N: int) -> tuple:
    alphas = [1.0]
    for n in range(1, N + 1):
        alphas.append(alphas[-1] * (1.5 - n) / n)
    return tuple(alphas)


def binom_sqrt_coeffs(N: int) -> BinomialCoefficients:
    """``alpha_0..alpha_N`` with ``alpha_n = (1/2 choose n)``, from ``alpha_n = alpha_{n-1} (3/2 - n) / n``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return BinomialCoefficients(_coeffs(int(N)))


def majorant(r: float) -> float:
    """``1 - sqrt(1 - r)``, written to avoid cancellation for small ``r``."""
    return r / (1.0 + math.sqrt(1.0 - r))


@dataclass(frozen=True)
class SeriesResult:
    value: np.ndarray
    terms_used: int
    tail_bound: float


def sqrt_one_minus(x, margin: float = DEFAULT_MARGIN) -> SeriesResult:
    """Principal ``sqrt(I - x)`` by partial sums of the binomial series.

    Summation stops once the majorant tail ``sum_{n > n0} |alpha_n| ||x||^n``
    is below ``1e-14``; that tail is returned as ``tail_bound``.
    """
    X = as_matrix(x, "x")
    if margin < DEFAULT_MARGIN:
        raise ValueError(f"margin must be at least {DEFAULT_MARGIN:g}")
    r = operator_norm(X)
    if r > 1.0 - margin:
        raise OutsideDisk(f"||x|| = {r:.17g} exceeds 1 - margin = {1.0 - margin:.17g}")
    eye = identity(X.shape[0])
    Y = eye.copy()
    if r == 0.0:
        return SeriesResult(Y, 1, 0.0)

    total = majorant(r)
    partial = 0.0
    comp = 0.0  # Kahan compensation; the tail is a difference of O(1) quantities
    power = eye
    alpha = 1.0
    rn = 1.0
    n = 0
    tail = total
    while tail >= TAIL_TOL:
        n += 1
        if n > MAX_TERMS:
            raise NoConvergence(f"binomial series needs more than {MAX_TERMS} terms at ||x|| = {r:.6g}")
        alpha *= (1.5 - n) / n
        rn *= r
        power = power @ X
        # (-1)^n alpha_n = -|alpha_n| for every n >= 1
        Y -= abs(alpha) * power
        y = abs(alpha) * rn - comp
        t = partial + y
        comp = (t - partial) - y
        partial = t
        tail = max(total - partial, 0.0)
    return SeriesResult(Y, n + 1, tail)


def verify_sqrt_bound(x, margin: float = DEFAULT_MARGIN) -> tuple[float, float]:
    """Return ``(||I - sqrt(I - x)||, 1 - sqrt(1 - ||x||))``; the first never exceeds the second."""
    X = as_matrix(x, "x")
    res = sqrt_one_minus(X, margin)
    lhs = operator_norm(identity(X.shape[0]) - res.value)
    rhs = majorant(operator_norm(X))
    return lhs, rhs


def halve(C2s, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """Recover ``C(s)`` from ``C(2s)`` as ``sqrt(I - (I - C(2s)) / 2)``.

    Requires ``||C(2s) - I|| <= 2 (1 - margin)``. This picks the principal
    root, which is the right one when ``rho(C(s) - I) < 1``; callers own that
    hypothesis. The doubling identity is checked on the way out.
    """
    C2 = as_matrix(C2s, "C2s")
    eye = identity(C2.shape[0])
    d = operator_norm(C2 - eye)
    if d > 2.0 * (1.0 - margin):
        raise OutsideDisk(f"||C(2s) - I|| = {d:.17g} exceeds 2 (1 - margin)")
    Cs = sqrt_one_minus(0.5 * (eye - C2), margin).value
    residual = operator_norm(2.0 * (Cs @ Cs) - eye - C2)
    if residual > 1e-9 * max(1.0, operator_norm(C2)):
        raise NoConvergence(f"halving failed the doubling check (residual {residual:.3g})")
    return Cs


def dyadic_reconstruct(C1, k: int, margin: float = DEFAULT_MARGIN) -> list[np.ndarray]:
    """``[C(1/2), C(1/4), ..., C(2^-k)]`` from ``C(1)`` by repeated halving.

    On failure at stage ``j`` (1-based) raises :class:`OutsideDisk` carrying
    the stages computed so far.
    """
    current = as_matrix(C1, "C1")
    stages = []
    for j in range(1, int(k) + 1):
        try:
            current = halve(current, margin)
        except OutsideDisk as exc:
            raise OutsideDisk(f"stage {j}: {exc}", stage=j, partial=stages) from None
        stages.append(current)
    return stages
