"""Closed-form complexity, redundancy, and tail-probability quantities.

All logarithms are natural (the exponential bounds force nats).
Redundancy values are the upper-bound expressions obtained from the rate
inequality r >= 1 - gamma/rho; the realized-rate variant is available
when a concrete graph supplies k = n - rank(H).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .tanner import TannerGraph, code_dimension


@dataclass(frozen=True)
class GateCostModel:
    """Pluggable majority-gate complexity gamma -> D_gamma (elementary
    components).  How D_gamma scales is a technology choice; the default
    2*gamma - 1 matches the worked convention under which rho = 2*gamma
    minimizes redundancy."""

    d_maj: Callable[[int], int]
    name: str = "custom"

    def cost(self, gamma: int) -> int:
        d = int(self.d_maj(gamma))
        if d < 1:
            raise ValueError(f"majority-gate cost must be >= 1, got {d} at {gamma}")
        return d


DEFAULT_COST = GateCostModel(lambda gamma: 2 * gamma - 1, name="2*gamma-1")


def constant_cost(value: int) -> GateCostModel:
    return GateCostModel(lambda _gamma: value, name=f"constant:{value}")


def complexity(n: int, gamma: int, rho: int,
               cost: GateCostModel = DEFAULT_COST) -> int:
    """Total component count n*(1 + D_gamma + gamma*(rho-2)): one register,
    one majority gate, and the per-variable share of the XOR chains."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n == 0:
        return 0
    _validate_degrees(gamma, rho)
    return n * (1 + cost.cost(gamma) + gamma * (rho - 2))


def _validate_degrees(gamma: int, rho: int) -> None:
    if gamma < 2:
        raise ValueError(f"gamma must be at least 2, got {gamma}")
    if rho <= gamma:
        raise ValueError(f"rate degenerate: need rho > gamma, got rho={rho}")


def redundancy(gamma: int, rho: int, cost: GateCostModel = DEFAULT_COST) -> float:
    """Upper bound (1 + D_gamma + gamma*(rho-2)) / (1 - gamma/rho)."""
    _validate_degrees(gamma, rho)
    return (1 + cost.cost(gamma) + gamma * (rho - 2)) / (1.0 - gamma / rho)


def redundancy_tk(gamma: int, rho: int, cost: GateCostModel = DEFAULT_COST) -> float:
    """Bit-copy architecture bound
    (2 + D_{gamma-1} + (gamma-1)*(rho-1)) * gamma / (1 - gamma/rho)."""
    _validate_degrees(gamma, rho)
    return ((2 + cost.cost(gamma - 1) + (gamma - 1) * (rho - 1)) * gamma
            / (1.0 - gamma / rho))


def realized_redundancy(g: TannerGraph, cost: GateCostModel = DEFAULT_COST) -> float:
    """Redundancy against the realized dimension k = n - rank(H)."""
    k = code_dimension(g)
    if k == 0:
        raise ValueError("code stores no information (rank(H) = n)")
    return complexity(g.n, g.gamma, g.rho, cost) / k


def optimal_rho(gamma: int, cost: GateCostModel = DEFAULT_COST,
                rho_max: int | None = None) -> int:
    """Integer rho in (gamma, rho_max] minimizing the redundancy bound;
    ties break toward smaller rho."""
    if gamma < 2:
        raise ValueError(f"gamma must be at least 2, got {gamma}")
    if rho_max is None:
        rho_max = 4 * gamma
    if rho_max <= gamma + 1:
        raise ValueError("rho_max leaves an empty search range")
    best_rho = gamma + 1
    best = redundancy(gamma, best_rho, cost)
    for rho in range(gamma + 2, rho_max + 1):
        val = redundancy(gamma, rho, cost)
        if val < best:
            best, best_rho = val, rho
    return best_rho


def kl_divergence(x: float, y: float) -> float:
    """D(x||y) between Bernoulli(x) and Bernoulli(y), in nats, with the
    limit convention 0*log(0) = 0 at x in {0, 1}."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0,1], got {x}")
    if not 0.0 < y < 1.0:
        raise ValueError(f"y must lie in (0,1), got {y}")
    terms = 0.0
    if x > 0.0:
        terms += x * math.log(x / y)
    if x < 1.0:
        terms += (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    return terms


def chernoff_tail(p: float, delta: float, n: int) -> tuple[float, float]:
    """Tail bounds for more than a p+delta fraction of n independent
    p-faulty components failing: (exp(-D(p+delta||p)*n), exp(-2*delta^2*n)),
    the first always at most the second."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    if delta <= 0.0 or p + delta >= 1.0:
        raise ValueError(f"need 0 < delta and p + delta < 1, got delta={delta}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    exact = math.exp(-kl_divergence(p + delta, p) * n)
    loose = math.exp(-2.0 * delta * delta * n)
    return exact, loose


def pf_bound(L: int, n: int, eps_m: float, eps_xor: float, eps_maj: float) -> float:
    """Memory-failure probability bound
    L * (e^{-2 eps_m^2 n} + e^{-2 eps_xor^2 n} + e^{-2 eps_maj^2 n}),
    capped at 1 for reporting.  The epsilons are the margins p + eps = alpha
    of the independent rates under their adversarial budgets."""
    if L < 1 or n < 1:
        raise ValueError("need L >= 1 and n >= 1")
    for name, val in (("eps_m", eps_m), ("eps_xor", eps_xor), ("eps_maj", eps_maj)):
        if val <= 0.0:
            raise ValueError(f"{name} must be positive, got {val}")
    raw = L * (math.exp(-2 * eps_m ** 2 * n)
               + math.exp(-2 * eps_xor ** 2 * n)
               + math.exp(-2 * eps_maj ** 2 * n))
    return min(1.0, raw)
