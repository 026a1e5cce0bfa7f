"""Register- and gate-fault plan generation for both failure models.

The adversarial model spends fixed per-use budgets (a maximal adversary
always spends them exactly); the independent model flips each component
with a fixed probability per use.  All draws are pure functions of
(seed, cycle) so that trials and cycles are reproducible and can be
split counter-style from a root seed.
"""

from __future__ import annotations

import hashlib
import math
import threading
from dataclasses import dataclass

import numpy as np

from .decoders import GateFaultPlan, parallel_bitflip_round_many
from .exceptions import BudgetViolationError
from .expansion import ExpansionProfile
from .tanner import TannerGraph, Word, as_word, zero_word

STRATEGIES = ("random", "repeat", "cluster", "greedy")

# floor(alpha * N) on the mathematical product, shielded from float dust
def _budget_count(fraction: float, units: int) -> int:
    return int(math.floor(fraction * units + 1e-9))


def _entropy(seed, cycle=None) -> tuple:
    if isinstance(seed, (int, np.integer)):
        parts = [int(seed)]
    else:
        parts = [int(s) for s in seed]
    if cycle is not None:
        parts.append(int(cycle))
    return tuple(parts)


_local = threading.local()


def rng_for(seed, cycle=None) -> np.random.Generator:
    """Generator keyed by (seed, cycle); seed may be an int or a tuple of
    ints, giving counter-based stream splitting.

    The PCG64 state is derived by hashing the key, so any two distinct
    keys yield independent streams and the same key always reproduces the
    same draws.  Each thread reuses one generator object: the value
    returned is only valid until the next rng_for call on that thread, so
    consume it immediately and do not store it.
    """
    rng = getattr(_local, "rng", None)
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(0))
        _local.rng = rng
    digest = hashlib.blake2b(repr(_entropy(seed, cycle)).encode(),
                             digest_size=32).digest()
    rng.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {"state": int.from_bytes(digest[:16], "little"),
                  "inc": int.from_bytes(digest[16:], "little") | 1},
        "has_uint32": 0,
        "uinteger": 0,
    }
    return rng


@dataclass(frozen=True)
class AdversarialBudget:
    """Worst-case fault fractions per use: registers per interval,
    two-input XOR gates and majority gates per round."""

    alpha_m: float = 0.0
    alpha_xor: float = 0.0
    alpha_maj: float = 0.0

    def __post_init__(self):
        for name in ("alpha_m", "alpha_xor", "alpha_maj"):
            val = getattr(self, name)
            if not 0.0 <= val < 1.0:
                raise ValueError(f"{name} must lie in [0,1), got {val}")

    def register_count(self, g: TannerGraph) -> int:
        return _budget_count(self.alpha_m, g.n)

    def xor_count(self, g: TannerGraph) -> int:
        return _budget_count(self.alpha_xor, g.n * g.gamma * (g.rho - 2))

    def maj_count(self, g: TannerGraph) -> int:
        return _budget_count(self.alpha_maj, g.n)

    def check_plans(self, g: TannerGraph, reg_plan: "RegisterFaultPlan",
                    gate_plan: GateFaultPlan) -> None:
        if len(reg_plan.flips) > self.register_count(g):
            raise BudgetViolationError(
                f"{len(reg_plan.flips)} register flips exceed budget "
                f"{self.register_count(g)}"
            )
        if len(gate_plan.xor_flips) > self.xor_count(g):
            raise BudgetViolationError(
                f"{len(gate_plan.xor_flips)} XOR gate faults exceed budget "
                f"{self.xor_count(g)}"
            )
        if len(gate_plan.maj_flips) > self.maj_count(g):
            raise BudgetViolationError(
                f"{len(gate_plan.maj_flips)} majority gate faults exceed budget "
                f"{self.maj_count(g)}"
            )


@dataclass(frozen=True)
class IndependentRates:
    """Per-use flip probabilities, each in [0, 1/2)."""

    p_m: float = 0.0
    p_xor: float = 0.0
    p_maj: float = 0.0

    def __post_init__(self):
        for name in ("p_m", "p_xor", "p_maj"):
            val = getattr(self, name)
            if not 0.0 <= val < 0.5:
                raise ValueError(f"{name} must lie in [0, 1/2), got {val}")


@dataclass(frozen=True)
class RegisterFaultPlan:
    """Registers whose stored bit is complemented this interval."""

    flips: frozenset = frozenset()

    @classmethod
    def empty(cls) -> "RegisterFaultPlan":
        return _EMPTY_REG

    def indices(self) -> np.ndarray:
        return np.fromiter(sorted(self.flips), dtype=np.int64, count=len(self.flips))

    def apply(self, word: Word) -> Word:
        out = word.copy()
        if self.flips:
            out[self.indices()] ^= 1
        return out


_EMPTY_REG = RegisterFaultPlan()


def _xor_tuples_from_flat(flat, rho: int) -> frozenset:
    chain = rho - 2
    out = []
    for idx in flat:
        idx = int(idx)
        pos = idx % chain
        rest = idx // chain
        out.append((rest // rho, rest % rho, pos))
    return frozenset(out)


def draw_independent(rates: IndependentRates, g: TannerGraph, seed, cycle):
    """Independent per-component Bernoulli plans, deterministic for
    (seed, cycle).  Draw order is registers, XOR gates, majority gates;
    a zero-rate component class draws nothing."""
    rng = rng_for(seed, cycle)
    if rates.p_m > 0.0:
        reg = frozenset(np.flatnonzero(rng.random(g.n) < rates.p_m).tolist())
    else:
        reg = frozenset()
    if rates.p_xor > 0.0:
        total = g.n * g.gamma * (g.rho - 2)
        flat = np.flatnonzero(rng.random(total) < rates.p_xor)
        xor = _xor_tuples_from_flat(flat, g.rho)
    else:
        xor = frozenset()
    if rates.p_maj > 0.0:
        maj = frozenset(np.flatnonzero(rng.random(g.n) < rates.p_maj).tolist())
    else:
        maj = frozenset()
    return RegisterFaultPlan(reg), GateFaultPlan(xor, maj)


def _exact_subset(rng, total: int, count: int) -> frozenset:
    if count == 0:
        return frozenset()
    if count == 1:
        return frozenset((int(rng.integers(0, total)),))
    return frozenset(int(x) for x in rng.choice(total, size=count, replace=False))


def _cluster_order(g: TannerGraph, rng) -> tuple[list[int], list[tuple[int, int, int]]]:
    """Variables in neighborhood order of a seed-fixed check permutation,
    plus the XOR gate ids of those checks in enumeration order."""
    order = rng.permutation(g.m)
    vars_seen: list[int] = []
    seen = set()
    gates: list[tuple[int, int, int]] = []
    for c in order:
        c = int(c)
        for v in g.check_nbrs[c]:
            v = int(v)
            if v not in seen:
                seen.add(v)
                vars_seen.append(v)
        for k in range(g.rho):
            for pos in range(g.rho - 2):
                gates.append((c, k, pos))
    return vars_seen, gates


GREEDY_POOL_SIZE = 64


def _word_view(word, n: int) -> np.ndarray:
    """Shape/dtype normalization without the per-bit value scan; fault
    draws sit on the simulator's hot path and its words are binary by
    construction.  Non-array or wrongly sized input still fails loudly."""
    if isinstance(word, np.ndarray) and word.dtype == np.uint8:
        if word.shape != (n,):
            raise ValueError(f"length mismatch: expected {n} bits, got {word.shape}")
        return word
    return as_word(word, n)


def _greedy_candidates(g, rng, budget_count, observed, original, pool_size):
    """Candidate register-flip sets, shape (pool_size, budget_count);
    candidate 0 deterministically targets fresh registers, the rest are
    uniform subsets."""
    corrupt = observed != original
    fresh = np.flatnonzero(~corrupt)
    stale = np.flatnonzero(corrupt)
    first = np.sort(np.concatenate([fresh, stale])[:budget_count])
    rest = pool_size - 1
    if budget_count == 1:
        rand = rng.integers(0, g.n, size=rest)[:, None]
    else:
        rand = np.argpartition(rng.random((rest, g.n)), budget_count - 1,
                               axis=1)[:, :budget_count]
    return np.vstack([first[None, :], np.sort(rand, axis=1)])


def _greedy_scores(g, cands, observed, original):
    """Lookahead key per candidate: post-correction corrupt count after
    one reliable flip round, pre-correction count as tie break.  The
    first argmax of the key is the chosen candidate (earliest wins)."""
    pool = cands.shape[0]
    states = np.tile(observed, (pool, 1))
    states[np.arange(pool)[:, None], cands] ^= 1
    pre = (states != original).sum(axis=1)
    corrected = parallel_bitflip_round_many(g, states)
    post = (corrected != original).sum(axis=1)
    return post * (g.n + 1) + pre


def _greedy_registers(g, rng, budget_count, observed, original, pool_size):
    """One-step lookahead: among candidate flip sets, pick the one whose
    post-correction corrupt count (one reliable flip round) is largest;
    ties prefer higher pre-correction corruption, then the earliest
    candidate."""
    if budget_count == 0:
        return frozenset()
    cands = _greedy_candidates(g, rng, budget_count, observed, original, pool_size)
    best = int(np.argmax(_greedy_scores(g, cands, observed, original)))
    return frozenset(int(x) for x in cands[best])


def draw_adversarial(budget: AdversarialBudget, g: TannerGraph, strategy: str,
                     seed, cycle, observed_state, original=None,
                     pool_size: int = GREEDY_POOL_SIZE):
    """Plans exactly at budget, per strategy:

    * random  -- uniform subsets, fresh per cycle;
    * repeat  -- the same subsets every cycle (seed only);
    * cluster -- registers concentrated on the variable neighborhoods of
      a seed-fixed check ordering, gates on the same checks;
    * greedy  -- register flips chosen by one-step lookahead against one
      reliable correction round (bounded candidate pool), gates random.

    The adversary sees the current register state and, for greedy
    scoring, the originally stored word (worst-case, information
    unrestricted); it never sees future randomness.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    observed = _word_view(observed_state, g.n)
    original = zero_word(g.n) if original is None else _word_view(original, g.n)
    rc, xc, mc = budget.register_count(g), budget.xor_count(g), budget.maj_count(g)
    total_xor = g.n * g.gamma * (g.rho - 2)

    if strategy == "random" or strategy == "repeat":
        rng = rng_for(seed, cycle) if strategy == "random" else rng_for(seed)
        reg = _exact_subset(rng, g.n, rc)
        xor = _xor_tuples_from_flat(sorted(_exact_subset(rng, total_xor, xc)), g.rho)
        maj = _exact_subset(rng, g.n, mc)
    elif strategy == "cluster":
        rng = rng_for(seed)
        var_order, gate_order = _cluster_order(g, rng)
        reg = frozenset(var_order[:rc])
        xor = frozenset(gate_order[:xc])
        maj = frozenset(var_order[:mc])
    else:  # greedy
        rng = rng_for(seed, cycle)
        reg = _greedy_registers(g, rng, rc, observed, original, pool_size)
        xor = _xor_tuples_from_flat(sorted(_exact_subset(rng, total_xor, xc)), g.rho)
        maj = _exact_subset(rng, g.n, mc)

    reg_plan = RegisterFaultPlan(reg)
    gate_plan = GateFaultPlan(xor, maj)
    budget.check_plans(g, reg_plan, gate_plan)
    return reg_plan, gate_plan


def draw_adversarial_greedy_many(budget: AdversarialBudget, g: TannerGraph,
                                 seeds, cycle, observed_mat, original,
                                 pool_size: int = GREEDY_POOL_SIZE):
    """Greedy draws for many independent trials at once.

    Produces, for each trial i, exactly the plans of
    draw_adversarial(budget, g, 'greedy', seeds[i], cycle, observed_mat[i],
    original): the per-trial random streams and the scoring rule are
    identical, only the lookahead rounds of all candidate pools run in
    one vectorized call.
    """
    trials = len(seeds)
    original = zero_word(g.n) if original is None else _word_view(original, g.n)
    rc, xc, mc = budget.register_count(g), budget.xor_count(g), budget.maj_count(g)
    total_xor = g.n * g.gamma * (g.rho - 2)

    cands = np.empty((trials, pool_size, rc), dtype=np.int64) if rc else None
    gate_parts = []
    for i in range(trials):
        rng = rng_for(seeds[i], cycle)
        if rc:
            cands[i] = _greedy_candidates(g, rng, rc, observed_mat[i],
                                          original, pool_size)
        xor = _xor_tuples_from_flat(sorted(_exact_subset(rng, total_xor, xc)), g.rho)
        maj = _exact_subset(rng, g.n, mc)
        gate_parts.append((xor, maj))

    if rc:
        flat = cands.reshape(trials * pool_size, rc)
        states = np.repeat(observed_mat, pool_size, axis=0)
        states[np.arange(trials * pool_size)[:, None], flat] ^= 1
        pre = (states != original).sum(axis=1)
        corrected = parallel_bitflip_round_many(g, states)
        post = (corrected != original).sum(axis=1)
        keys = (post * (g.n + 1) + pre).reshape(trials, pool_size)
        best = np.argmax(keys, axis=1)

    plans = []
    for i in range(trials):
        reg = (frozenset(int(x) for x in cands[i, int(best[i])])
               if rc else frozenset())
        reg_plan = RegisterFaultPlan(reg)
        gate_plan = GateFaultPlan(*gate_parts[i])
        budget.check_plans(g, reg_plan, gate_plan)
        plans.append((reg_plan, gate_plan))
    return plans


# ---------------------------------------------------------------------------
# Model wrappers consumed by the simulator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdversarialModel:
    budget: AdversarialBudget
    strategy: str = "random"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )

    @property
    def kind(self) -> str:
        return "adversarial"

    @property
    def state_dependent(self) -> bool:
        return self.strategy == "greedy"

    @property
    def cycle_dependent(self) -> bool:
        return self.strategy in ("random", "greedy")

    def draw(self, g, seed, cycle, observed, original):
        return draw_adversarial(self.budget, g, self.strategy, seed, cycle,
                                observed, original)


@dataclass(frozen=True)
class IndependentModel:
    rates: IndependentRates

    @property
    def kind(self) -> str:
        return "independent"

    @property
    def state_dependent(self) -> bool:
        return False

    @property
    def cycle_dependent(self) -> bool:
        return True

    def draw(self, g, seed, cycle, observed, original):
        return draw_independent(self.rates, g, seed, cycle)


def theorem2_margin(budget: AdversarialBudget, gamma: int, rho: int,
                    profile: ExpansionProfile) -> float:
    """Slack of the tolerance condition: alpha*(1+4e)*(4e)/2 minus
    alpha_m + gamma*(rho-2)*alpha_xor + alpha_maj.  Positive means the
    budgets are tolerable (the condition is strict, so 0 is not)."""
    spend = budget.alpha_m + gamma * (rho - 2) * budget.alpha_xor + budget.alpha_maj
    return profile.alpha_total - spend


def exceedance_frequency(p: float, delta: float, n: int, draws: int, seed,
                         chunk: int | None = None) -> float:
    """Monte Carlo frequency of the event 'more than (p+delta)*n of n
    independent components fail', each failing with probability p.

    Drawn as per-component Bernoulli masks (in chunks) so the estimate is
    the plain empirical counterpart of the tail being bounded.
    """
    if not 0.0 < p < 1.0 or delta <= 0.0:
        raise ValueError("need 0 < p < 1 and delta > 0")
    if draws < 1 or n < 1:
        raise ValueError("need draws >= 1 and n >= 1")
    rng = rng_for(seed)
    if chunk is None:
        chunk = max(1, 2_000_000 // n)
    threshold = (p + delta) * n
    exceed = 0
    left = draws
    while left > 0:
        take = min(chunk, left)
        counts = (rng.random((take, n)) < p).sum(axis=1)
        exceed += int((counts > threshold).sum())
        left -= take
    return exceed / draws
