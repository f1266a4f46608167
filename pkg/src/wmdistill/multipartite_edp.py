"""GHZ- and W-state distribution through amplitude damping with optional
weak-measurement filtering before a recurrence EDP."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bell_edp import EfficiencyReport, _recurrence_yields
from .channels import check_unit_interval
from .exceptions import NotDistillableError, QuadratureError
from .qstate import DensityMatrix

DEFAULT_EPSILON = 1e-6


# --- GHZ ------------------------------------------------------------------


@dataclass(frozen=True)
class GHZStateParams:
    """Populations and the single coherence of a damped (and filtered)
    ``(|001> + |110>)/sqrt(2)`` state."""

    p000: float
    p001: float
    p010: float
    p100: float
    p110: float
    coherence: float  # <001|rho|110>, real and symmetric

    @property
    def norm(self) -> float:
        return self.p000 + self.p001 + self.p010 + self.p100 + self.p110

    def normalized(self) -> GHZStateParams:
        z = self.norm
        return GHZStateParams(*(x / z for x in self.as_tuple()))

    def as_tuple(self) -> tuple:
        return (self.p000, self.p001, self.p010, self.p100, self.p110, self.coherence)

    def density(self) -> DensityMatrix:
        p = self.normalized()
        rho = np.zeros((8, 8), dtype=complex)
        for label in ("000", "001", "010", "100", "110"):
            i = int(label, 2)
            rho[i, i] = getattr(p, "p" + label)
        rho[1, 6] = rho[6, 1] = p.coherence
        return DensityMatrix(rho)


def ghz_noisy_and_filtered(d: float, w: float = 0.0) -> tuple[GHZStateParams, float]:
    """Filtered noisy GHZ state (normalized) and the filter success probability.

    Each ket or bra ``|0>`` picks up a factor ``sqrt(1 - w)`` from the filter.
    """
    d = check_unit_interval("damping rate d", d)
    ww = 1 - check_unit_interval("measurement strength w", w)
    dd = 1 - d
    raw = GHZStateParams(
        p000=0.5 * d * (1 + d) * ww**3,
        p001=0.5 * dd * ww**2,
        p010=0.5 * d * dd * ww**2,
        p100=0.5 * d * dd * ww**2,
        p110=0.5 * dd**2 * ww,
        coherence=0.5 * math.sqrt(dd**3) * ww**1.5,
    )
    p_w = 0.5 * ww * (d * (1 + d) * ww**2 + dd * ww + 2 * d * dd * ww + dd**2)
    return raw.normalized(), p_w


def ghz_round(p: GHZStateParams) -> tuple[float, float, GHZStateParams]:
    """One round on two copies: probability of '111' (control left in the
    GHZ state), probability of '000', and the normalized control state
    after '000'."""
    p = p.normalized()
    p111 = 2 * p.p001 * p.p110
    p000 = p.p000**2 + p.p001**2 + p.p010**2 + p.p100**2 + p.p110**2
    nxt = GHZStateParams(
        p.p000**2, p.p001**2, p.p010**2, p.p100**2, p.p110**2, p.coherence**2
    ).normalized()
    return p111, p000, nxt


def ghz_efficiency(d: float, w: float, m: int) -> EfficiencyReport:
    """Filter-then-distill GHZ efficiency over ``m`` rounds."""
    _, p_w = ghz_noisy_and_filtered(d, w)
    dd, ww = 1 - d, 1 - w
    u, v = dd * ww**2, dd**2 * ww
    g0, g2 = d * (1 + d) * ww**3, d * dd * ww**2
    ys = _recurrence_yields(u, v, [g0, g2, g2], m)
    return EfficiencyReport(tuple(p_w * y for y in ys), p_w)


def noisy_ghz_density(d: float) -> DensityMatrix:
    return ghz_noisy_and_filtered(d, 0.0)[0].density()


# --- W states -------------------------------------------------------------


def noisy_w_density(n: int, fidelity: float) -> DensityMatrix:
    """``F|W_N><W_N| + (1 - F)|0...0><0...0|``."""
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    ones = [1 << k for k in range(n)]
    rho[np.ix_(ones, ones)] = fidelity / n
    rho[0, 0] = 1 - fidelity
    return DensityMatrix(rho)


def w_filtered(n: int, d: float, w: float) -> tuple[float, float]:
    """Fidelity and success probability of the filtered noisy W state."""
    d = check_unit_interval("damping rate d", d)
    ww = 1 - check_unit_interval("measurement strength w", w)
    dd = 1 - d
    return dd / (d * ww + dd), ww ** (n - 1) * (dd + d * ww)


def w_round(n: int, fidelity: float) -> tuple[float, float]:
    """One recurrence step: output fidelity and success probability."""
    if not 0 < fidelity <= 1:
        raise ValueError(f"fidelity must lie in (0, 1], got {fidelity}")
    f2, g2 = fidelity**2, (1 - fidelity) ** 2
    return f2 / (f2 + n * g2), f2 / n + g2


def w_threshold_strength(n: int, d: float) -> float:
    """Smallest filter strength above which one recurrence step raises fidelity."""
    if d <= 0:
        return 0.0
    return max(0.0, ((n + 1) * d - 1) / (n * d))


def _lambda0(d: float, w: float) -> float:
    return (1 - w) * d / (1 - d)


def w_steps(n: int, d: float, w: float, epsilon: float = DEFAULT_EPSILON) -> int:
    """Minimal number of recurrence steps to reach fidelity ``1 - epsilon``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    lam0 = _lambda0(d, w)
    target = epsilon / (1 - epsilon)
    if lam0 <= target:
        return 0
    if n * lam0 >= 1:
        raise NotDistillableError(
            f"N*lambda0 = {n * lam0:.6g} >= 1: filtered fidelity is below N/(N+1)",
            threshold=w_threshold_strength(n, d),
        )
    m = max(1, math.ceil(math.log2(math.log(n * target) / math.log(n * lam0))))
    # ceil of a float log can be off by one exactly on a region boundary
    while _lambda_at(n, lam0, m) > target:
        m += 1
    while m > 1 and _lambda_at(n, lam0, m - 1) <= target:
        m -= 1
    return m


def _lambda_at(n: int, lam0: float, i: int) -> float:
    lam = lam0
    for _ in range(i):
        lam = n * lam * lam
    return lam


@dataclass(frozen=True)
class WTrajectory:
    lambdas: tuple
    fidelities: tuple
    step_probs: tuple
    p_w: float
    efficiency: float

    @property
    def steps(self) -> int:
        return len(self.step_probs)


def w_trajectory(n: int, d: float, w: float, epsilon: float = DEFAULT_EPSILON, steps: int | None = None) -> WTrajectory:
    """Fidelity, step probabilities and efficiency of the filtered W-state
    recurrence, run for the minimal number of steps (or ``steps`` if given)."""
    fw, p_w = w_filtered(n, d, w)
    m = w_steps(n, d, w, epsilon) if steps is None else steps
    lams = [_lambda0(d, w)]
    for _ in range(m):
        lams.append(n * lams[-1] ** 2)
    fids = tuple(1 / (1 + lam) for lam in lams)
    probs = tuple((1 + lams[i]) / (n * (1 + lams[i - 1]) ** 2) for i in range(1, m + 1))
    eff = p_w * math.prod(p / 2 for p in probs)
    return WTrajectory(tuple(lams), fids, probs, p_w, eff)


def w_efficiency(n: int, d: float, w: float, epsilon: float = DEFAULT_EPSILON) -> float:
    return w_trajectory(n, d, w, epsilon).efficiency


def efficiency_ratio(n: int, d: float, w: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """Efficiency with filtering over efficiency without, each at its own
    minimal step count."""
    try:
        base = w_efficiency(n, d, 0.0, epsilon)
    except NotDistillableError as exc:
        raise NotDistillableError(
            f"d = {d} >= 1/(N+1): unfiltered scheme does not distill (NRWM-only regime)",
            threshold=exc.threshold,
        ) from None
    return w_efficiency(n, d, w, epsilon) / base


@dataclass(frozen=True)
class RegionBoundary:
    """Level set ``N(1-w)d/(1-d) = level`` separating ``steps - 1`` from ``steps``."""

    steps: int
    level: float
    n: int = 3

    @property
    def line_d(self) -> float:
        """Damping rate of the unfiltered (w = 0) straight line."""
        return self.level / (self.n + self.level)

    def curve_w(self, d):
        """Filter strength on the curve at damping ``d`` (may fall outside [0, 1))."""
        d = np.asarray(d, dtype=float)
        return 1 - self.level * (1 - d) / (self.n * d)


def region_boundaries(n: int, epsilon: float = DEFAULT_EPSILON, m_max: int = 8) -> list[RegionBoundary]:
    c = n * epsilon / (1 - epsilon)
    return [RegionBoundary(m, c ** (2.0**-m), n) for m in range(m_max + 1)]


def region_steps(n: int, d: float, w: float, boundaries: list[RegionBoundary]) -> int | None:
    """Step count read off the level sets, upper boundary inclusive.

    Returns None when the point lies beyond the last supplied boundary.
    """
    x = n * (1 - w) * d / (1 - d)
    for b in boundaries:
        if x <= b.level:
            return b.steps
    return None


def boundary_inequality(m: int, m_prime: int, x: float, y: float, n: int = 3) -> bool:
    """True iff filtering does not help: E_m(w) <= E_m'(0).

    ``x = 1 - w`` and ``y = N d/(1 - d)``; ``m``/``m_prime`` are the step
    counts with and without filtering.
    """
    lhs = 2.0 ** (m_prime - m) * x ** (n - 1) * (n + (x * y) ** (2**m))
    lhs *= math.prod(n + y ** (2**i) for i in range(m_prime))
    rhs = (n + y ** (2**m_prime)) * math.prod(n + (x * y) ** (2**i) for i in range(m))
    return lhs <= rhs


def _log_integrand(s: float, n: int) -> float:
    # u = e^s turns ln(2N+2u)/(u ln u) du into ln(2N+2e^s)/s ds
    return math.log(2 * n + 2 * math.exp(s)) / s


def asymptotic_ratio(n: int, d: float, w: float, rtol: float = 1e-9) -> float:
    """Limit of the efficiency ratio as the target infidelity goes to zero."""
    d = check_unit_interval("damping rate d", d)
    ww = 1 - check_unit_interval("measurement strength w", w)
    upper_unfiltered = n * d / (1 - d)
    if upper_unfiltered > 1 - 1e-6:
        raise ValueError(
            f"N*d/(1-d) = {upper_unfiltered:.6g} is not below 1; the limit needs d < 1/(N+1)"
        )
    if d == 0 or w == 0:
        return ww ** (n - 1)
    lo, hi = math.log(n * ww * d / (1 - d)), math.log(upper_unfiltered)
    value, abserr, info, *msg = integrate.quad(
        _log_integrand, hi, lo, args=(n,), epsabs=0.0, epsrel=rtol, limit=200, full_output=1
    )
    if msg:
        raise QuadratureError(f"quadrature did not converge: {msg[0]} (estimate {value}, error {abserr})")
    return ww ** (n - 1) * math.exp(value / math.log(2))


# --- optimal filter strength ----------------------------------------------


INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(f, a: float, b: float, tol: float = 1e-6) -> tuple[float, float]:
    """Maximize ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c, d = b - INV_PHI * (b - a), a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True)
class OptimalW:
    w: float
    efficiency: float
    steps: int


def optimal_w(n: int, d: float, epsilon: float = DEFAULT_EPSILON, step: float = 1e-3, tol: float = 1e-6) -> OptimalW:
    """Filter strength maximizing the W-state distribution efficiency.

    Coarse grid over [0, 1) followed by golden-section refinement inside the
    best grid bracket. Ties go to the smaller strength.
    """

    def objective(w):
        try:
            return w_efficiency(n, d, w, epsilon)
        except NotDistillableError:
            return -math.inf

    grid = np.arange(0.0, 1.0, step)
    values = np.array([objective(w) for w in grid])
    i = int(np.argmax(values))
    if not np.isfinite(values[i]):
        raise NotDistillableError(f"no distillable filter strength for N={n}, d={d}",
                                  threshold=w_threshold_strength(n, d))
    best_w, best_e = float(grid[i]), float(values[i])
    lo = float(grid[i - 1]) if i > 0 else 0.0
    hi = float(grid[i + 1]) if i + 1 < len(grid) else min(float(grid[i]) + step, 1.0 - 1e-12)
    w_ref, e_ref = golden_section_max(objective, lo, hi, tol)
    if e_ref > best_e:
        best_w, best_e = w_ref, e_ref
    return OptimalW(best_w, best_e, w_steps(n, d, best_w, epsilon))
