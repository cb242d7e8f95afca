"""Monte Carlo trial runner with analytic references and 3-sigma verdicts.

Determinism contract: a config (including its seed) fixes the output
bit-for-bit regardless of worker count. Trials are partitioned into
fixed-size chunks; chunk ``i`` draws from its own PCG64 stream seeded by
``(seed, i)``, and chunk results are merged in chunk order, so serial and
parallel execution produce identical aggregates.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .protocol import (
    StateFamily,
    analytic_remote_p_plus,
    remote_measurement_branch_stats,
    rsp_branch,
    rsp_run,
    simulate_remote_measurement,
    teleport_branch,
    teleport_branch_probabilities,
    teleport_baseline,
    TELEPORT_OUTCOME_ORDER,
)
from .measurement import AliceOutcome
from .qstate import ATOL, BellLabel, BlochVector, PureQubit, make_qubit

# Trials per RNG chunk. Fixed: changing it changes which stream serves
# which trial and therefore the sampled output.
CHUNK_TRIALS = 2048

MODES = ("rsp", "measure_sim", "teleport")


@dataclass(frozen=True)
class TrialConfig:
    mode: str
    theta: float
    phi: float
    bell: BellLabel = BellLabel.PSI_MINUS
    family: StateFamily = StateFamily.ARBITRARY
    b: BlochVector | None = None
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.mode == "measure_sim" and self.b is None:
            raise ValueError("measure_sim requires a measurement direction b")

    def target(self) -> PureQubit:
        return make_qubit(self.theta, self.phi)


@dataclass(frozen=True)
class FrequencyCheck:
    """One empirical frequency against its analytic reference."""

    name: str
    analytic: float
    empirical: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class TrialAggregate:
    mode: str
    trials: int
    counts: dict[str, int]
    frequencies: dict[str, float]
    analytic: dict[str, float]
    mean_fidelity: float | None
    exact_delivery_rate: float | None
    cbits_total: int
    three_sigma: float
    checks: tuple[FrequencyCheck, ...]
    verdict: str
    detail: tuple[dict, ...] | None = None


def three_sigma_bound(p: float, trials: int) -> float:
    """3 * binomial standard error for analytic probability p."""
    return 3.0 * math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def analytic_references(config: TrialConfig) -> dict[str, float]:
    """Closed-form reference probabilities for every tracked frequency.

    Pure function of the config; never consults any random stream.
    """
    target = config.target()
    if config.mode == "rsp":
        delivery = 1.0 if config.family is not StateFamily.ARBITRARY else 0.5
        return {
            "branch_cbit0": 0.5,
            "branch_cbit1": 0.5,
            "exact_delivery": delivery,
        }
    if config.mode == "measure_sim":
        p_plus = analytic_remote_p_plus(target, config.b)
        return {
            "branch_cbit0": 0.5,
            "branch_cbit1": 0.5,
            "outcome_plus": p_plus,
            "outcome_minus": 1.0 - p_plus,
        }
    refs = {f"outcome_{label.value}": 0.25 for label in TELEPORT_OUTCOME_ORDER}
    refs["exact_delivery"] = 1.0
    return refs


_HEADLINE = {"rsp": "exact_delivery", "measure_sim": "outcome_plus",
             "teleport": "outcome_psi-minus"}


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _chunk_sizes(trials: int) -> list[int]:
    sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        sizes.append(trials % CHUNK_TRIALS)
    return sizes


@dataclass
class _ChunkResult:
    counts: dict[str, int] = field(default_factory=dict)
    fidelity_sum: float = 0.0
    exact_count: int = 0
    cbits: int = 0

    def bump(self, key: str, by: int = 1) -> None:
        self.counts[key] = self.counts.get(key, 0) + by


def _run_chunk(config: TrialConfig, target: PureQubit, size: int, index: int) -> _ChunkResult:
    rng = _chunk_rng(config.seed, index)
    res = _ChunkResult()
    if config.mode == "rsp":
        for _ in range(size):
            t = rsp_run(target, config.bell, config.family, rng)
            if t.cbits_sent != 1:
                raise AssertionError("remote preparation must cost exactly one cbit")
            res.bump(f"branch_cbit{t.alice_outcome.cbit}")
            res.fidelity_sum += t.fidelity_to_target
            res.exact_count += int(t.exact_delivery)
            res.cbits += t.cbits_sent
    elif config.mode == "measure_sim":
        agg = simulate_remote_measurement(target, config.bell, config.b, size, rng)
        res.bump("outcome_plus", agg.plus_count)
        res.bump("outcome_minus", agg.minus_count)
        res.bump("branch_cbit0", agg.branch_counts[0])
        res.bump("branch_cbit1", agg.branch_counts[1])
        res.cbits += agg.cbits_total
    else:
        for _ in range(size):
            t = teleport_baseline(target, rng)
            if t.cbits_sent != 2:
                raise AssertionError("teleportation must cost exactly two cbits")
            res.bump(f"outcome_{t.alice_outcome.label.value}")
            res.fidelity_sum += t.fidelity_to_target
            res.exact_count += int(t.exact_delivery)
            res.cbits += t.cbits_sent
    return res


def _verdict(
    config: TrialConfig, trials: int, counts: dict[str, int], refs: dict[str, float]
) -> tuple[dict[str, float], tuple[FrequencyCheck, ...], float, str]:
    freqs = {}
    checks = []
    for name in sorted(refs):
        p = refs[name]
        if name == "exact_delivery":
            continue  # handled by the caller from exact counts
        emp = counts.get(name, 0) / trials
        freqs[name] = emp
        tol = three_sigma_bound(p, trials)
        checks.append(FrequencyCheck(name, p, emp, tol, abs(emp - p) <= tol))
    headline = _HEADLINE[config.mode]
    sigma = three_sigma_bound(refs[headline], trials)
    return freqs, tuple(checks), sigma, headline


def run_trials(config: TrialConfig, workers: int = 1) -> TrialAggregate:
    """Run the configured Monte Carlo experiment and judge it against analytics."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    target = config.target()
    refs = analytic_references(config)
    sizes = _chunk_sizes(config.trials)

    if workers == 1:
        results = [_run_chunk(config, target, n, i) for i, n in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda args: _run_chunk(config, target, *args),
                         [(n, i) for i, n in enumerate(sizes)])
            )

    counts: dict[str, int] = {}
    fidelity_sum = 0.0
    exact_count = 0
    cbits_total = 0
    for res in results:  # chunk order fixes float summation order
        for key, val in res.counts.items():
            counts[key] = counts.get(key, 0) + val
        fidelity_sum += res.fidelity_sum
        exact_count += res.exact_count
        cbits_total += res.cbits

    freqs, checks, sigma, _ = _verdict(config, config.trials, counts, refs)

    mean_fidelity = None
    exact_delivery_rate = None
    if config.mode in ("rsp", "teleport"):
        mean_fidelity = fidelity_sum / config.trials
        exact_delivery_rate = exact_count / config.trials
        freqs["exact_delivery"] = exact_delivery_rate
        p = refs["exact_delivery"]
        tol = three_sigma_bound(p, config.trials)
        checks = checks + (
            FrequencyCheck("exact_delivery", p, exact_delivery_rate, tol,
                           abs(exact_delivery_rate - p) <= tol),
        )

    verdict = "pass" if all(c.passed for c in checks) else "fail"
    return TrialAggregate(
        mode=config.mode,
        trials=config.trials,
        counts=dict(sorted(counts.items())),
        frequencies=dict(sorted(freqs.items())),
        analytic=dict(sorted(refs.items())),
        mean_fidelity=mean_fidelity,
        exact_delivery_rate=exact_delivery_rate,
        cbits_total=cbits_total,
        three_sigma=sigma,
        checks=tuple(sorted(checks, key=lambda c: c.name)),
        verdict=verdict,
    )


def analytic_run(config: TrialConfig) -> TrialAggregate:
    """Evaluate every branch exactly instead of sampling; consumes no randomness."""
    target = config.target()
    refs = analytic_references(config)
    checks: list[FrequencyCheck] = []
    detail: list[dict] = []
    counts: dict[str, int] = {}
    freqs: dict[str, float] = {}
    mean_fidelity = None
    exact_delivery_rate = None
    cbits_total = 0

    if config.mode == "rsp":
        branch_probs = {}
        fid_avg = 0.0
        exact_avg = 0.0
        for which in (AliceOutcome.PSI_PERP, AliceOutcome.PSI):
            t = rsp_branch(target, config.bell, config.family, which)
            name = f"branch_cbit{t.alice_outcome.cbit}"
            branch_probs[name] = t.alice_outcome.probability
            fid_avg += t.alice_outcome.probability * t.fidelity_to_target
            exact_avg += t.alice_outcome.probability * int(t.exact_delivery)
            cbits_total += t.cbits_sent
            detail.append(
                {
                    "cbit": t.alice_outcome.cbit,
                    "probability": t.alice_outcome.probability,
                    "fidelity_to_target": t.fidelity_to_target,
                    "exact_delivery": t.exact_delivery,
                }
            )
        for name in ("branch_cbit0", "branch_cbit1"):
            freqs[name] = branch_probs[name]
            checks.append(
                FrequencyCheck(name, refs[name], branch_probs[name], ATOL,
                               abs(branch_probs[name] - refs[name]) <= ATOL)
            )
        mean_fidelity = fid_avg
        exact_delivery_rate = exact_avg
        freqs["exact_delivery"] = exact_avg
        checks.append(
            FrequencyCheck("exact_delivery", refs["exact_delivery"], exact_avg, ATOL,
                           abs(exact_avg - refs["exact_delivery"]) <= ATOL)
        )
    elif config.mode == "measure_sim":
        stats0, stats1 = remote_measurement_branch_stats(target, config.bell, config.b)
        p_plus = 0.5 * stats0.p_plus + 0.5 * stats1.p_plus
        freqs["outcome_plus"] = p_plus
        freqs["outcome_minus"] = 1.0 - p_plus
        freqs["branch_cbit0"] = 0.5
        freqs["branch_cbit1"] = 0.5
        cbits_total = 1
        for name in sorted(refs):
            checks.append(
                FrequencyCheck(name, refs[name], freqs[name], ATOL,
                               abs(freqs[name] - refs[name]) <= ATOL)
            )
        detail.append(
            {
                "p_plus_holding_target": stats0.p_plus,
                "p_plus_holding_complement_flipped": stats1.p_plus,
            }
        )
    else:
        probs = teleport_branch_probabilities(target)
        fid_avg = 0.0
        exact_avg = 0.0
        for label in TELEPORT_OUTCOME_ORDER:
            t = teleport_branch(target, label)
            name = f"outcome_{label.value}"
            freqs[name] = probs[label]
            fid_avg += probs[label] * t.fidelity_to_target
            exact_avg += probs[label] * int(t.exact_delivery)
            cbits_total += t.cbits_sent
            checks.append(
                FrequencyCheck(name, refs[name], probs[label], ATOL,
                               abs(probs[label] - refs[name]) <= ATOL)
            )
            detail.append(
                {
                    "outcome": label.value,
                    "probability": probs[label],
                    "fidelity_to_target": t.fidelity_to_target,
                    "cbits": t.cbits_sent,
                }
            )
        mean_fidelity = fid_avg
        exact_delivery_rate = exact_avg
        freqs["exact_delivery"] = exact_avg
        checks.append(
            FrequencyCheck("exact_delivery", refs["exact_delivery"], exact_avg, ATOL,
                           abs(exact_avg - refs["exact_delivery"]) <= ATOL)
        )

    verdict = "pass" if all(c.passed for c in checks) else "fail"
    return TrialAggregate(
        mode=config.mode,
        trials=0,
        counts=counts,
        frequencies=dict(sorted(freqs.items())),
        analytic=dict(sorted(refs.items())),
        mean_fidelity=mean_fidelity,
        exact_delivery_rate=exact_delivery_rate,
        cbits_total=cbits_total,
        three_sigma=0.0,
        checks=tuple(sorted(checks, key=lambda c: c.name)),
        verdict=verdict,
        detail=tuple(detail),
    )
