"""Differential-privacy building blocks shared by every synthesis phase.

Seeded generators exist for testing only. A release that must actually be
private has to draw its noise from OS entropy (``seed=None``); a known seed
makes the noise reproducible and voids the guarantee.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

# Sensitivities of the five released statistics (one edge flips each by at most this much).
SENS_INNER = 2.0
SENS_OUTER = 1.0
SENS_CONNECTION = 1.0
SENS_DEGREE = 2.0
SENS_EDGE_VECTOR = 1.0

SEQUENTIAL = "sequential"
PARALLEL = "parallel"

# Phase names used by the synthesis pipeline ledger.
PHASE_INIT = "init"
PHASE_ADJUST = "adjust"
PHASE_EXTRACT = "extract"
PHASE_RECONSTRUCT = "reconstruct"

_REL_TOL = 1e-12


class InvalidBudgetError(ValueError):
    pass


class BudgetViolationError(RuntimeError):
    """A ledger spent more than its budget allows."""


def make_rng(seed: int | None | np.random.Generator = None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_eps(eps: float) -> None:
    if not (eps > 0):  # also rejects NaN
        raise InvalidBudgetError(f"privacy budget must be positive, got {eps!r}")


def laplace_perturb(values, sensitivity: float, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. Laplace(sensitivity / eps) noise to every entry."""
    _check_eps(eps)
    values = np.asarray(values, dtype=np.float64)
    scale = sensitivity / eps
    if math.isinf(eps):
        return values.copy()
    return values + rng.laplace(0.0, scale, size=values.shape)


def em_probabilities(qualities, sensitivity: float, eps: float) -> np.ndarray:
    """Selection distribution of the exponential mechanism (max-shifted softmax)."""
    _check_eps(eps)
    q = np.asarray(qualities, dtype=np.float64)
    if q.size == 0:
        raise ValueError("exponential mechanism needs at least one candidate")
    if math.isinf(eps):
        p = (q == q.max()).astype(np.float64)
        return p / p.sum()
    logits = (eps / (2.0 * sensitivity)) * q
    w = np.exp(logits - logits.max())
    return w / w.sum()


def em_select(qualities, sensitivity: float, eps: float, rng: np.random.Generator) -> int:
    """Sample an index with probability proportional to ``exp(eps*q / (2*sensitivity))``.

    ``eps=math.inf`` is the noiseless limit: the first maximal index is returned
    without consuming randomness.
    """
    _check_eps(eps)
    q = np.asarray(qualities, dtype=np.float64)
    if q.size == 0:
        raise ValueError("exponential mechanism needs at least one candidate")
    if math.isinf(eps):
        return int(np.argmax(q))
    logits = (eps / (2.0 * sensitivity)) * q
    cdf = np.cumsum(np.exp(logits - logits.max()))
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), q.size - 1)


def _shifted_sum(x: np.ndarray, delta: int) -> float:
    return math.fsum(np.maximum(x + delta, 0.0).tolist())


def norm_sub_shift(noisy) -> int:
    """Integer shift ``delta*`` minimizing ``|sum(max(x+delta, 0)) - sum(x)|``.

    Ties go to the smallest ``|delta|``, then the smaller ``delta``. The
    shifted sum is non-decreasing in ``delta`` and flat only where every entry
    is clipped, so the optimum is one of the two integers bracketing the target
    sum or the flat region's point nearest zero.
    """
    x = np.asarray(noisy, dtype=np.float64).ravel()
    if x.size == 0:
        return 0
    target = math.fsum(x.tolist())
    bound = math.ceil(10.0 * float(np.abs(x).max())) + 1
    lo, hi = -bound, bound
    # smallest delta in [lo, hi] with shifted sum >= target; f(hi) >= target always
    a, b = lo, hi
    while a < b:
        mid = (a + b) // 2
        if _shifted_sum(x, mid) >= target:
            b = mid
        else:
            a = mid + 1
    candidates = {a}
    if a - 1 >= lo:
        candidates.add(a - 1)
    # largest delta where everything clips to zero; f == 0 on [lo, flat_end]
    flat_end = min(math.floor(-float(x.max())), hi)
    if flat_end >= lo:
        candidates.add(0 if flat_end >= 0 else flat_end)
    # just past the flat region the sum can be tiny enough to round into a tie
    if flat_end + 1 <= hi:
        candidates.add(max(flat_end + 1, lo))
    best = min(candidates, key=lambda d: (abs(_shifted_sum(x, d) - target), abs(d), d))
    return int(best)


def norm_sub(noisy) -> np.ndarray:
    """Shift by ``norm_sub_shift`` and clip at zero; preserves the total where possible."""
    x = np.asarray(noisy, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    return np.maximum(x + norm_sub_shift(x), 0.0)


@dataclass(frozen=True)
class PrivacyBudget:
    """Three-way split of the total budget over the private phases."""

    eps1: float
    eps2: float
    eps3: float

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps3"):
            _check_eps(getattr(self, name))

    @classmethod
    def split(cls, eps_total: float, fractions: Sequence[float] = (1 / 3, 1 / 3, 1 / 3)) -> "PrivacyBudget":
        _check_eps(eps_total)
        if len(fractions) != 3 or any(f <= 0 for f in fractions):
            raise InvalidBudgetError("budget split needs three positive fractions")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise InvalidBudgetError(f"budget fractions sum to {sum(fractions)}, not 1")
        return cls(*(f * eps_total for f in fractions))

    def total(self) -> float:
        return self.eps1 + self.eps2 + self.eps3

    def allotments(self) -> dict[str, float]:
        return {
            PHASE_INIT: self.eps1,
            PHASE_ADJUST: self.eps2,
            PHASE_EXTRACT: self.eps3,
            PHASE_RECONSTRUCT: 0.0,
        }


@dataclass(frozen=True)
class PhaseBudget:
    """Arbitrary named phase allotments, e.g. for the TmF baseline."""

    phases: Mapping[str, float]

    def total(self) -> float:
        return math.fsum(self.phases.values())

    def allotments(self) -> dict[str, float]:
        return dict(self.phases)


@dataclass(frozen=True)
class LedgerEntry:
    phase: str
    eps: float
    composition: str
    note: str = ""


@dataclass
class PrivacyLedger:
    """Ordered record of every budget charge made during a run.

    Within a phase, ``parallel`` charges act on disjoint data and cost their
    maximum; ``sequential`` charges add up. Phases compose sequentially.
    """

    entries: list[LedgerEntry] = field(default_factory=list)

    def spend(self, phase: str, eps: float, composition: str, note: str = "") -> None:
        if composition not in (SEQUENTIAL, PARALLEL):
            raise ValueError(f"unknown composition kind {composition!r}")
        if eps < 0 or math.isnan(eps):
            raise InvalidBudgetError(f"negative spend {eps!r}")
        self.entries.append(LedgerEntry(phase, float(eps), composition, note))

    def phase_costs(self) -> dict[str, float]:
        seq: dict[str, float] = {}
        par: dict[str, float] = {}
        for e in self.entries:
            seq.setdefault(e.phase, 0.0)
            par.setdefault(e.phase, 0.0)
            if e.composition == SEQUENTIAL:
                seq[e.phase] += e.eps
            else:
                par[e.phase] = max(par[e.phase], e.eps)
        return {p: seq[p] + par[p] for p in seq}

    def total(self) -> float:
        return sum(self.phase_costs().values())

    def to_dict(self) -> dict:
        return {
            "entries": [vars(e) for e in self.entries],
            "phase_costs": self.phase_costs(),
            "total": self.total(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_entries(cls, entries: Iterable[tuple]) -> "PrivacyLedger":
        led = cls()
        for item in entries:
            led.spend(*item)
        return led


@dataclass(frozen=True)
class Verdict:
    passed: bool
    spent: float
    budget: float
    phase_costs: dict[str, float]
    violations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "spent": self.spent,
            "budget": self.budget,
            "phase_costs": self.phase_costs,
            "violations": list(self.violations),
        }


def _exceeds(spent: float, allowed: float) -> bool:
    return spent > allowed + _REL_TOL * max(1.0, abs(allowed))


def accountant_check(budget: PrivacyBudget | PhaseBudget, ledger: PrivacyLedger) -> Verdict:
    """Compose the ledger and compare against the budget.

    Each phase is checked against its own allotment, phases without an
    allotment may not spend anything, and the total is checked last.
    """
    costs = ledger.phase_costs()
    allot = budget.allotments()
    violations = []
    for phase, cost in costs.items():
        allowed = allot.get(phase, 0.0)
        if _exceeds(cost, allowed):
            violations.append(f"phase {phase!r} spent {cost!r} > allotted {allowed!r}")
    spent = sum(costs.values())
    if _exceeds(spent, budget.total()):
        violations.append(f"total spend {spent!r} > budget {budget.total()!r}")
    return Verdict(not violations, spent, budget.total(), costs, tuple(violations))


def enforce(budget, ledger: PrivacyLedger) -> Verdict:
    verdict = accountant_check(budget, ledger)
    if not verdict.passed:
        raise BudgetViolationError("; ".join(verdict.violations))
    return verdict
