"""Brute-force circuit validation of the closed forms.

Every check rebuilds a protocol step by step on explicit density matrices
(transmit, filter, bilateral CNOT, measure, post-select) and compares the
outcome with the analytic expression.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bell_edp, multipartite_edp
from .channels import filter_all, transmit
from .exceptions import ConfigError
from .qstate import (
    DensityMatrix,
    apply_cnot,
    bell_state,
    concurrence,
    fidelity_with_pure,
    ghz_state,
    measure_computational,
    tensor,
    tensor_power,
    w_state,
)

TOLERANCE = 1e-12
DEFAULT_SEED = 20160901
MAX_W_PARTIES = 5


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    closed_form: float
    simulated: float
    abs_error: float
    tolerance: float = TOLERANCE
    case: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.abs_error < self.tolerance)

    def as_row(self) -> dict:
        row = asdict(self)
        row["pass"] = self.passed
        return row


def _scalar(quantity, closed, simulated, case):
    closed, simulated = float(closed), float(simulated)
    return OracleReport(quantity, closed, simulated, abs(closed - simulated), case=case)


def _matrix(quantity, closed: DensityMatrix, simulated: DensityMatrix | None, case):
    if simulated is None:
        return OracleReport(quantity, float(np.linalg.norm(closed.data)), math.nan, math.inf, case=case)
    err = float(np.max(np.abs(closed.data - simulated.data)))
    return OracleReport(
        quantity, float(np.linalg.norm(closed.data)), float(np.linalg.norm(simulated.data)), err, case=case
    )


def _branches(results) -> dict:
    return {bits: (p, rho) for bits, p, rho in results}


def _bilateral_round(pair_a: DensityMatrix, pair_b: DensityMatrix, n: int) -> dict:
    """CNOT from each qubit of copy a onto the matching qubit of copy b,
    then measure copy b. Returns ``{outcome: (probability, state of a)}``."""
    rho = tensor(pair_a, pair_b)
    for q in range(n):
        rho = apply_cnot(rho, q, q + n)
    return _branches(measure_computational(rho, list(range(n, 2 * n))))


def validate_bell_filter(d1, d2, w1, w2) -> list[OracleReport]:
    case = f"d1={d1!r} d2={d2!r} w1={w1!r} w2={w2!r}"
    s = bell_edp.BellScenario(d1, d2, w1, w2)
    rho_d = transmit(bell_state(), [d1, d2])
    rho_w, p_w = filter_all(rho_d, [w1, w2])
    params, p_w_closed, c_w_closed = bell_edp.bell_filtered_state(s)
    return [
        _matrix("bell.rho_d", bell_edp.decohered_bell_density(d1, d2), rho_d, case),
        _scalar("bell.C(rho_d)", math.sqrt((1 - d1) * (1 - d2)), concurrence(rho_d), case),
        _scalar("bell.P_w", p_w_closed, p_w, case),
        _matrix("bell.rho_w", params.density(), rho_w, case),
        _scalar("bell.C(rho_w)", c_w_closed, concurrence(rho_w) if rho_w is not None else math.nan, case),
    ]


def validate_two_copy_round(params: bell_edp.TwoCopyRoundParams, second_round: bool = True) -> list[OracleReport]:
    p = params.normalized()
    case = f"amp01={p.amp01!r} amp10={p.amp10!r} vac={p.vac!r}"
    rho = p.density()
    p1, p0, nxt = bell_edp.two_copy_round(p)
    out = _bilateral_round(rho, rho, 2)
    sim11, post11 = out.get("11", (0.0, None))
    sim00, post00 = out.get("00", (0.0, None))
    discard = sum(out.get(k, (0.0, None))[0] for k in ("01", "10"))
    reports = [
        _scalar("two_copy.P1", p1, sim11, case),
        _matrix("two_copy.state|11", bell_state().density(), post11, case),
        _scalar("two_copy.P0", p0, sim00, case),
        _matrix("two_copy.state|00", nxt.density(), post00, case),
        _scalar("two_copy.P_discard", 1 - p1 - p0, discard, case),
    ]
    if second_round:
        reports.append(_two_round_chain(p, case))
    return reports


def _two_round_chain(p: bell_edp.TwoCopyRoundParams, case: str) -> OracleReport:
    """Four copies: two first-round groups both giving '00', then a second
    round on the survivors giving '11'. Checked against the round-2 yield."""
    rho = tensor_power(p.density(), 4)
    # copies 0,1 and 2,3 form the first-round groups; copy k holds qubits 2k, 2k+1
    for control, target in ((0, 1), (2, 3)):
        for side in range(2):
            rho = apply_cnot(rho, 2 * control + side, 2 * target + side)
    first = _branches(measure_computational(rho, [2, 3, 6, 7]))
    p_both00, survivors = first.get("0000", (0.0, None))
    joint = 0.0
    if survivors is not None:
        for q in range(2):
            survivors = apply_cnot(survivors, q, q + 2)
        second = _branches(measure_computational(survivors, [2, 3]))
        joint = p_both00 * second.get("11", (0.0, None))[0]
    _, p0, _ = bell_edp.two_copy_round(p)
    y2 = bell_edp._recurrence_yields(p.amp01**2, p.amp10**2, [p.vac], 2)[1]
    # Y2 = P0 * P1(round 2) / 4, and the four-copy event has probability P0^2 * P1(round 2)
    return _scalar("two_copy.round2_joint", 4 * y2 * p0, joint, case)


def validate_nonmax_pipeline(d, w) -> list[OracleReport]:
    case = f"d={d!r} w={w!r}"
    rho = transmit(bell_edp.nonmax_initial_state(d), [d, 0.0])
    rho_w, p_w = filter_all(rho, [w, w])
    a2, b2 = 1 / (2 - d), (1 - d) / (2 - d)
    ww = 1 - w
    closed = bell_edp.TwoCopyRoundParams(math.sqrt(a2 * ww), math.sqrt(b2 * (1 - d) * ww), b2 * d * ww * ww)
    return [
        _scalar("nonmax.P_w", closed.norm, p_w, case),
        _matrix("nonmax.rho_w", closed.density(), rho_w, case),
    ]


def validate_ghz_round(d, w) -> list[OracleReport]:
    case = f"d={d!r} w={w!r}"
    rho_d = transmit(ghz_state(), [d, d, d])
    rho_w, p_w = filter_all(rho_d, [w, w, w])
    params, p_w_closed = multipartite_edp.ghz_noisy_and_filtered(d, w)
    p111, p000, nxt = multipartite_edp.ghz_round(params)
    y1 = multipartite_edp.ghz_efficiency(d, w, 1).distillation_yield
    out = _bilateral_round(rho_w, rho_w, 3)
    sim111, post111 = out.get("111", (0.0, None))
    sim000, post000 = out.get("000", (0.0, None))
    discard = sum(p for k, (p, _) in out.items() if k not in ("111", "000"))
    return [
        _matrix("ghz.rho_d", multipartite_edp.noisy_ghz_density(d), rho_d, case),
        _scalar("ghz.P_w", p_w_closed, p_w, case),
        _matrix("ghz.rho_w", params.density(), rho_w, case),
        _scalar("ghz.P111", p111, sim111, case),
        _scalar("ghz.Y1", y1, sim111 / 2, case),
        _matrix("ghz.state|111", ghz_state().density(), post111, case),
        _scalar("ghz.P000", p000, sim000, case),
        _matrix("ghz.state|000", nxt.density(), post000, case),
        _scalar("ghz.P_discard", 1 - p111 - p000, discard, case),
    ]


def validate_w_round(n, d, w, steps: int = 1) -> list[OracleReport]:
    if not 2 <= n <= MAX_W_PARTIES:
        raise ConfigError(f"W-state oracle supports 2 <= N <= {MAX_W_PARTIES}, got N={n}")
    case = f"N={n} d={d!r} w={w!r}"
    target = w_state(n)
    rho_d = transmit(target, [d] * n)
    rho_w, p_w = filter_all(rho_d, [w] * n)
    f_w, p_w_closed = multipartite_edp.w_filtered(n, d, w)
    traj = multipartite_edp.w_trajectory(n, d, w, steps=steps)
    reports = [
        _matrix("w.rho_d", multipartite_edp.noisy_w_density(n, 1 - d), rho_d, case),
        _scalar("w.F", 1 - d, fidelity_with_pure(rho_d, target), case),
        _scalar("w.p_w", p_w_closed, p_w, case),
        _scalar("w.F_w", f_w, fidelity_with_pure(rho_w, target), case),
        _matrix("w.rho_w", multipartite_edp.noisy_w_density(n, f_w), rho_w, case),
    ]
    state, f_in = rho_w, f_w
    for i in range(1, steps + 1):
        f_out, p_i = multipartite_edp.w_round(n, f_in)
        out = _bilateral_round(state, state, n)
        sim_p, post = out.get("0" * n, (0.0, None))
        discard = sum(p for k, (p, _) in out.items() if k != "0" * n)
        reports += [
            _scalar(f"w.p_{i}", p_i, sim_p, case),
            _scalar(f"w.p_{i}(trajectory)", traj.step_probs[i - 1], sim_p, case),
            _scalar(f"w.F_{i}", f_out, fidelity_with_pure(post, target), case),
            _scalar(f"w.F_{i}(trajectory)", traj.fidelities[i], fidelity_with_pure(post, target), case),
            _matrix(f"w.rho_{i}", multipartite_edp.noisy_w_density(n, f_out), post, case),
            _scalar(f"w.discard_{i}", 1 - p_i, discard, case),
        ]
        state, f_in = post, f_out
    return reports


@dataclass
class ValidationRun:
    seed: int
    samples: int
    reports: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def failures(self) -> list:
        return [r for r in self.reports if not r.passed]


def run_all(seed: int = DEFAULT_SEED, samples: int = 50, w_parties=(3, 4, 5), d_max: float = 0.95) -> ValidationRun:
    """Run every oracle suite on ``samples`` seeded random parameter sets."""
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    w_parties = list(w_parties)
    for n in w_parties:
        if not 2 <= n <= MAX_W_PARTIES:
            raise ConfigError(f"W-state oracle supports 2 <= N <= {MAX_W_PARTIES}, got N={n}")
    rng = np.random.default_rng(seed)
    run = ValidationRun(seed, samples)
    for k in range(samples):
        d1, d2, w1, w2 = (float(x) for x in rng.uniform(0.0, d_max, size=4))
        run.reports += validate_bell_filter(d1, d2, w1, w2)
        params, _, _ = bell_edp.bell_filtered_state(bell_edp.BellScenario(d1, d2, w1, w2))
        run.reports += validate_two_copy_round(params)
        run.reports += validate_nonmax_pipeline(d1, w1)
        run.reports += validate_ghz_round(d2, w2)
        n = w_parties[k % len(w_parties)] if w_parties else 3
        run.reports += validate_w_round(n, d1, w2, steps=2)
    return run
