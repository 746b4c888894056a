"""Entanglement bookkeeping: what a gate costs in ebits.

Every attempt consumes the partial pair, worth its entropy of
entanglement; in deterministic mode a failure additionally consumes one
Bell pair (one ebit).  The expected total cost of a gate at angle
``theta`` using resource angle ``alpha`` is therefore

    cost(theta, alpha) = 1 - p_max(theta, alpha) + entropy(alpha)

Minimizing over ``alpha`` tells whether running on a partial pair ever
beats simply using a Bell pair (cost exactly 1).  It does for small
enough gate angles; :func:`threshold_theta` locates the break-even
angle, which sits near 0.234 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .povm import CASE_BAND, HALF_PI, ProtocolParams, optimum

__all__ = [
    "EntanglementReport",
    "average_cost",
    "binary_entropy",
    "min_cost_over_alpha",
    "resource_entropy",
    "threshold_theta",
]

#: Costs this close to 1 are treated as "not better than a Bell pair".
#: The band absorbs last-ulp noise in the cost evaluation; real margins
#: near the threshold are orders of magnitude larger.
BREAK_EVEN_BAND = 1e-12

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi ~ 0.618


def binary_entropy(p: float) -> float:
    """Shannon entropy of a bit in base 2, with ``0 log 0 := 0``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def resource_entropy(alpha: float) -> float:
    """Entanglement of the resource pair in ebits.

    The reduced state of either half has eigenvalues ``cos(alpha/2)^2``
    and ``sin(alpha/2)^2``, so this is their binary entropy: 0 as
    ``alpha -> 0`` and exactly 1 ebit at ``alpha = pi/2``.
    """
    if not 0.0 < alpha <= HALF_PI:
        raise ValueError(f"alpha must lie in (0, pi/2], got {alpha!r}")
    return binary_entropy(math.cos(alpha / 2.0) ** 2)


@dataclass(frozen=True)
class EntanglementReport:
    """Cost breakdown for one parameter point."""

    theta: float
    alpha: float
    p_max: float
    entropy: float
    avg_cost: float


def average_cost(params: ProtocolParams) -> EntanglementReport:
    """Expected ebits per deterministically completed gate."""
    p = optimum(params).p_max
    e = resource_entropy(params.alpha)
    return EntanglementReport(theta=params.theta, alpha=params.alpha,
                              p_max=p, entropy=e, avg_cost=1.0 - p + e)


def _cost_grid(theta: float, alphas: np.ndarray) -> np.ndarray:
    """Vectorized average cost over many resource angles."""
    ca = np.cos(alphas)
    ca[np.abs(ca) < 1e-15] = 0.0  # same snap as the scalar closed forms
    ct = math.cos(theta)
    ct = 0.0 if abs(ct) < 1e-15 else ct
    st = math.sin(theta)
    case_ii = ca * (st + ct) - 1.0 > CASE_BAND
    p = np.where(case_ii,
                 (1.0 - ca * ca) / (2.0 * (1.0 - ct * ca)),
                 1.0 - st * ca)
    c2 = np.cos(alphas / 2.0) ** 2
    entropy = -c2 * np.log2(c2) - (1.0 - c2) * np.log2(1.0 - c2)
    return 1.0 - p + entropy


def min_cost_over_alpha(theta: float, tol: float = 1e-6) -> tuple[float, float]:
    """Best resource angle for a given gate angle.

    Scans 1000 grid points over (0, pi/2], then sharpens the best
    bracket by golden-section search down to width ``tol`` (radians).
    Returns ``(alpha_star, cost_star)``; when nothing beats the Bell
    endpoint the endpoint itself is returned with its exact cost.
    """
    if not 0.0 < theta <= HALF_PI:
        raise ValueError(f"theta must lie in (0, pi/2], got {theta!r}")
    if not 1e-8 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-8, 1e-3], got {tol!r}")
    n = 1000
    alphas = np.linspace(HALF_PI / n, HALF_PI, n)
    costs = _cost_grid(theta, alphas)
    i = int(np.argmin(costs))
    best_alpha = float(alphas[i])
    best_cost = float(average_cost(ProtocolParams(theta, best_alpha)).avg_cost)

    lo = float(alphas[max(i - 1, 0)])
    hi = float(alphas[min(i + 1, n - 1)])

    def cost(a: float) -> float:
        return average_cost(ProtocolParams(theta, a)).avg_cost

    # Golden-section: keeps a shrinking bracket around the interior
    # minimum; one new evaluation per iteration.
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = cost(c), cost(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = cost(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = cost(d)
    refined_alpha = c if fc < fd else d
    refined_cost = min(fc, fd)
    if refined_cost < best_cost:
        return float(refined_alpha), float(refined_cost)
    return best_alpha, best_cost


def threshold_theta(tol: float = 1e-4) -> float:
    """Largest gate angle at which a partial pair still beats a Bell pair.

    Below the threshold the minimized cost drops strictly under 1; at
    and above it the minimum is the Bell endpoint at exactly 1.
    Bisection on that predicate over (0.1 pi, 0.4 pi), to a width of
    ``tol`` in units of pi.
    """
    if not 1e-6 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-6, 1e-3] (units of pi), got {tol!r}")

    def beats_bell(theta: float) -> bool:
        return min_cost_over_alpha(theta, tol=1e-8)[1] < 1.0 - BREAK_EVEN_BAND

    lo, hi = 0.1 * math.pi, 0.4 * math.pi
    if not beats_bell(lo) or beats_bell(hi):
        raise RuntimeError(
            "threshold bracket (0.1 pi, 0.4 pi) does not straddle break-even")
    while hi - lo > tol * math.pi:
        mid = 0.5 * (lo + hi)
        if beats_bell(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
