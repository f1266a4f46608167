"""Bipartite distribution: decohered and filtered Bell pairs, the two-copy
recurrence EDP, and the bisection EDP."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import check_unit_interval, filter_all, transmit
from .qstate import DensityMatrix, superposition


@dataclass(frozen=True)
class BellScenario:
    d1: float
    d2: float
    w1: float = 0.0
    w2: float = 0.0

    def __post_init__(self):
        for name in ("d1", "d2"):
            check_unit_interval(f"damping rate {name}", getattr(self, name))
        for name in ("w1", "w2"):
            check_unit_interval(f"measurement strength {name}", getattr(self, name))

    @classmethod
    def symmetric(cls, d: float, w: float = 0.0) -> BellScenario:
        return cls(d, d, w, w)


@dataclass(frozen=True)
class TwoCopyRoundParams:
    """State ``(amp01|01> + amp10|10>)(h.c.) + vac|00><00|`` up to normalization."""

    amp01: float
    amp10: float
    vac: float

    def __post_init__(self):
        if min(self.amp01, self.amp10, self.vac) < 0:
            raise ValueError("round parameters must be nonnegative")

    @property
    def norm(self) -> float:
        return self.vac + self.amp01**2 + self.amp10**2

    def normalized(self) -> TwoCopyRoundParams:
        z = self.norm
        if z <= 0:
            raise ValueError("all-zero round parameters")
        return TwoCopyRoundParams(self.amp01 / math.sqrt(z), self.amp10 / math.sqrt(z), self.vac / z)

    def density(self) -> DensityMatrix:
        p = self.normalized()
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 1] = p.amp01**2
        rho[2, 2] = p.amp10**2
        rho[1, 2] = rho[2, 1] = p.amp01 * p.amp10
        rho[0, 0] = p.vac
        return DensityMatrix(rho)

    @classmethod
    def from_density(cls, rho: DensityMatrix) -> TwoCopyRoundParams:
        """Read the parameters back off a two-qubit matrix of this form."""
        rho = rho.normalized()
        return cls(
            math.sqrt(max(rho.entry("01").real, 0.0)),
            math.sqrt(max(rho.entry("10").real, 0.0)),
            rho.entry("00").real,
        )


@dataclass(frozen=True)
class EfficiencyReport:
    """Yields of a distribution run.

    ``per_round_yields`` already include the filtering success probability,
    so ``cumulative`` is the end-to-end efficiency.
    """

    per_round_yields: tuple
    filter_probability: float = 1.0

    @property
    def cumulative(self) -> float:
        return float(sum(self.per_round_yields))

    @property
    def rounds(self) -> int:
        return len(self.per_round_yields)

    @property
    def distillation_yield(self) -> float:
        """Efficiency of the distillation stage alone (filtered inputs)."""
        return self.cumulative / self.filter_probability


def decohered_bell_density(d1: float, d2: float) -> DensityMatrix:
    """Closed form of the Bell pair after amplitude damping on both qubits."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = (1 - d2) / 2
    rho[2, 2] = (1 - d1) / 2
    rho[1, 2] = rho[2, 1] = math.sqrt((1 - d1) * (1 - d2)) / 2
    rho[0, 0] = (d1 + d2) / 2
    return DensityMatrix(rho)


def bell_filtered_state(s: BellScenario) -> tuple[TwoCopyRoundParams, float, float]:
    """Filtered pair parameters, filter success probability, and concurrence."""
    dd1, dd2, ww1, ww2 = 1 - s.d1, 1 - s.d2, 1 - s.w1, 1 - s.w2
    raw = TwoCopyRoundParams(math.sqrt(dd2 * ww1), math.sqrt(dd1 * ww2), (s.d1 + s.d2) * ww1 * ww2)
    p_w = 0.5 * raw.norm
    c = math.sqrt(dd1 * dd2 * ww1 * ww2) / p_w
    return raw.normalized(), p_w, c


def two_copy_round(p: TwoCopyRoundParams) -> tuple[float, float, TwoCopyRoundParams]:
    """One bilateral-CNOT round on two copies.

    Returns the probability of target outcome '11' (control left in the
    Bell state), of outcome '00', and the normalized control-pair state
    after '00'.
    """
    z = p.norm
    if z <= 0:
        raise ValueError("all-zero round parameters")
    u, v, g = p.amp01**2 / z, p.amp10**2 / z, p.vac / z
    p1 = 2 * u * v
    p0 = u * u + v * v + g * g
    nxt = TwoCopyRoundParams(u, v, g * g).normalized() if p0 > 0 else TwoCopyRoundParams(0.0, 0.0, 1.0)
    return p1, p0, nxt


def _recurrence_yields(u: float, v: float, diagonal, m: int) -> list[float]:
    """Per-round yields of the two-copy recurrence, closed-form ratio form.

    ``u``, ``v`` are the populations of the two coherent components and
    ``diagonal`` the incoherent populations, all unnormalized. Round ``k``
    yield relates to round ``k-1`` through ``(uv)^(2^(k-2)) / (2 Z_k)`` with
    ``Z_k`` the sum of all populations raised to ``2^(k-1)``. Everything is
    rescaled by the largest population so high powers cannot underflow to 0/0.
    """
    if m < 1:
        raise ValueError("need at least one round")
    diagonal = list(diagonal)
    z1 = u + v + sum(diagonal)
    yields = [u * v / z1**2]
    s = max([u, v] + diagonal)
    base = [x / s for x in [u, v] + diagonal]
    uv = (u / s) * (v / s)
    for k in range(2, m + 1):
        zk = sum(x ** (2 ** (k - 1)) for x in base)
        yields.append(yields[-1] * uv ** (2 ** (k - 2)) / (2 * zk))
    return yields


def two_copy_efficiency(s: BellScenario, m: int) -> EfficiencyReport:
    """Filter-then-distill efficiency over ``m`` recurrence rounds."""
    dd1, dd2, ww1, ww2 = 1 - s.d1, 1 - s.d2, 1 - s.w1, 1 - s.w2
    u, v, g = dd2 * ww1, dd1 * ww2, (s.d1 + s.d2) * ww1 * ww2
    p_w = 0.5 * (u + v + g)
    ys = _recurrence_yields(u, v, [g], m)
    return EfficiencyReport(tuple(p_w * y for y in ys), p_w)


def iterate_two_copy(p: TwoCopyRoundParams, m: int) -> list[float]:
    """Per-round distillation yields obtained by chaining :func:`two_copy_round`."""
    yields, survive = [], 1.0
    for k in range(1, m + 1):
        p1, p0, p = two_copy_round(p)
        yields.append(survive * p1 / 2**k)
        survive *= p0
    return yields


def nonmax_initial_state(d: float):
    """Partially entangled input tuned for damping ``d`` on the first qubit only."""
    check_unit_interval("damping rate d", d)
    return superposition({"01": 1 / math.sqrt(2 - d), "10": math.sqrt((1 - d) / (2 - d))})


def nonmax_initial_pipeline(d: float, w: float, m: int) -> EfficiencyReport:
    """Two-copy efficiency starting from :func:`nonmax_initial_state`.

    Only the first qubit is damped; both are filtered with strength ``w``.
    The filtered pair is obtained by density-matrix simulation and then fed
    to the recurrence.
    """
    check_unit_interval("measurement strength w", w)
    rho = transmit(nonmax_initial_state(d), [d, 0.0])
    rho_w, p_w = filter_all(rho, [w, w])
    params = TwoCopyRoundParams.from_density(rho_w)
    return EfficiencyReport(tuple(p_w * y for y in iterate_two_copy(params, m)), p_w)


def _check_power_of_two(n: int) -> int:
    n = int(n)
    if n < 1 or n & (n - 1):
        raise ValueError(f"number of copies must be a power of two, got {n}")
    return n


def bisection_outcome_stats(n: int, t: float, a: int, b: int) -> tuple[int, float, int | None]:
    """Multiplicity, probability and (when a+b=n) Schmidt rank of the
    Hamming-weight outcome (a, b) on ``n`` copies with pure-pair weight ``t``."""
    n = _check_power_of_two(n)
    if a < 0 or b < 0 or a + b > n:
        raise ValueError(f"invalid outcome a={a}, b={b} for n={n}")
    count = math.comb(n, a + b) * math.comb(a + b, a)
    prob = 2.0 ** (-a - b) * t ** (a + b) * (1 - t) ** (n - a - b) * count
    rank = math.comb(n, a) if a + b == n else None
    return count, prob, rank


def bisection_H(x: int) -> float:
    """Mean log-rank per pair after projecting ``x`` perfect pairs."""
    total = sum(math.comb(x, k) * math.log2(math.comb(x, k)) for k in range(x + 1))
    return total / (x * 2.0**x)


def bisection_t(d: float, w: float) -> float:
    """Weight of the Bell component in the symmetric filtered pair."""
    return (1 - d) / (d * (1 - w) + 1 - d)


def bisection_efficiency(d: float, w: float, n: int) -> EfficiencyReport:
    n = _check_power_of_two(n)
    if n < 2:
        raise ValueError("bisection needs at least two copies")
    _, p_w, _ = bell_filtered_state(BellScenario.symmetric(d, w))
    t = bisection_t(d, w)
    levels = int(math.log2(n))
    ys = [t ** (2**k) * (bisection_H(2**k) - bisection_H(2 ** (k - 1))) for k in range(1, levels + 1)]
    return EfficiencyReport(tuple(p_w * y for y in ys), p_w)
