"""
Order Sweeps
------------
Enumerate every total order of an intersection-closed family, classify each, resolve it,
and cross-check that all intersection-order resolutions agree. Resolutions and pairwise
equivalence checks run as independent tasks on a bounded thread pool.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

from corner_calculus.arrangement import (
    INTERSECTION_ORDER,
    SIZE_ORDER,
    AffinePSub,
    is_intersection_closed,
    is_p_clean,
    order_class,
)
from corner_calculus.atlas import Atlas
from corner_calculus.blowup import BlowupSequence, resolve
from corner_calculus.errors import PreconditionError, StepError
from corner_calculus.faces import EQUIVALENT, check_equivalence

logger = logging.getLogger(__name__)

MODES = ("enumerate", "classify", "equiv-all")
STEP_ERROR = "StepError"


@dataclass
class OrderOutcome:
    order: tuple[str, ...]
    order_class: str
    step_error: str | None = None
    all_clean: bool | None = None
    sequence: BlowupSequence | None = field(default=None, repr=False, compare=False)

    @property
    def permissible(self) -> bool:
        return self.order_class in (SIZE_ORDER, INTERSECTION_ORDER)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"order": list(self.order), "class": self.order_class}
        if self.step_error is not None:
            out["step_error"] = self.step_error
        if self.all_clean is not None:
            out["all_clean"] = self.all_clean
        return out


@dataclass
class OrdersReport:
    mode: str
    family: list[str]
    outcomes: list[OrderOutcome] = field(default_factory=list)
    comparisons: list[dict[str, Any]] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for o in self.outcomes:
            key = STEP_ERROR if o.step_error is not None else o.order_class
            out[key] = out.get(key, 0) + 1
        return dict(sorted(out.items()))

    @property
    def falsified(self) -> bool:
        """An intersection order failed to resolve, or two of them disagree."""
        if any(o.permissible and o.step_error is not None for o in self.outcomes):
            return True
        return any(c["status"] != EQUIVALENT for c in self.comparisons)

    def to_json(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "family": list(self.family),
            "orders": len(self.outcomes),
            "counts": self.counts,
            "outcomes": [o.to_json() for o in self.outcomes],
            "comparisons": self.comparisons,
            "falsified": self.falsified,
        }


def enumerate_orders(ids: Sequence[str], cap: int) -> list[tuple[str, ...]]:
    total = math.factorial(len(ids))
    if total > cap:
        raise PreconditionError(f"{len(ids)} centres give {total} orders, above the cap of {cap}")
    return list(itertools.permutations(ids))


def _resolve_outcome(atlas: Atlas, outcome: OrderOutcome, tracked: Sequence[str]) -> OrderOutcome:
    try:
        seq = resolve(atlas, outcome.order, tracked)
    except StepError as exc:
        outcome.step_error = str(exc)
        return outcome
    outcome.sequence = seq
    outcome.all_clean = seq.all_clean
    return outcome


def run_orders(
    atlas: Atlas,
    ids: Sequence[str],
    *,
    mode: str = "classify",
    cap: int = 3628800,
    threads: int = 1,
    tracked: Sequence[str] = (),
) -> OrdersReport:
    if mode not in MODES:
        raise ValueError(f"Unknown mode '{mode}'. Must be one of {list(MODES)}")
    root = atlas.lifted[atlas.charts[0].label]
    missing = [i for i in ids if i not in root]
    if missing:
        raise PreconditionError(f"Centres {missing} are not carried by atlas {atlas.name}")
    family: list[AffinePSub] = [root[i] for i in ids]
    if not is_intersection_closed(family):
        raise PreconditionError("Order sweeps need an intersection-closed family")
    if not is_p_clean(family, excluded=atlas.charts[0].excludes_sub):
        raise PreconditionError("Order sweeps need a p-clean family")

    report = OrdersReport(mode, list(ids))
    for order in enumerate_orders(ids, cap):
        report.outcomes.append(OrderOutcome(order, order_class([root[i] for i in order])))
    logger.info("Enumerated %d orders of %d centres", len(report.outcomes), len(ids))
    if mode == "enumerate":
        return report

    todo = report.outcomes if mode == "classify" else [o for o in report.outcomes if o.permissible]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda o: _resolve_outcome(atlas, o, tracked), todo))

    if mode == "equiv-all":
        done = [o for o in todo if o.sequence is not None]
        pairs = list(itertools.combinations(done, 2))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda p: check_equivalence(p[0].sequence.final, p[1].sequence.final), pairs)  # type: ignore[union-attr]
            )
        for (a, b), res in zip(pairs, results):
            report.comparisons.append(
                {"a": list(a.order), "b": list(b.order), "status": res.status, "reasons": res.reasons}
            )
        logger.info("Compared %d pairs of intersection-order resolutions", len(pairs))
    return report
