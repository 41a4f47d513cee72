"""Sobolev weights, optimal index sets and anisotropic total-degree sets.

The weight of a multi-index is ``u = (1 + t)**-0.5`` with cost
``t(gamma) = sum_i gamma_i / lam_b_i``.  Ordering indices by nonincreasing
``u`` is ordering them by nondecreasing cost, which is what
:func:`enumerate_rearrangement` does with a best-first lattice search.
"""
from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BadParams, InfiniteEffectiveDimension, ResourceLimit, SetTooLarge
from .multiindex import MultiIndex
from .spectrum import AtLeast, Spectrum, effective_dimension

__all__ = [
    "MultiIndex",
    "RearrangementItem",
    "RearrangementList",
    "TDIndexSet",
    "TIE_RTOL",
    "cost",
    "sobolev_weight",
    "enumerate_rearrangement",
    "td_index_set",
    "td_size_bounds",
    "s_epsilon_set",
]

# relative tolerance for treating two costs as tied
TIE_RTOL = 1e-12
MAX_POPS = 10**7
DEFAULT_MAX_WINDOW = 1 << 16


def cost(gamma: MultiIndex, s: Spectrum) -> float:
    return math.fsum(v * s.inverse_weighted(i) for i, v in gamma.entries)


def sobolev_weight(gamma: MultiIndex, s: Spectrum) -> float:
    """``(1 + sum_i gamma_i / lam_b_i)**-0.5``, equal to 1 for the zero index."""
    return 1.0 / math.sqrt(1.0 + cost(gamma, s))


@dataclass(frozen=True)
class RearrangementItem:
    index: MultiIndex
    cost: float

    @property
    def weight(self) -> float:
        return 1.0 / math.sqrt(1.0 + self.cost)


@dataclass(frozen=True)
class RearrangementList:
    """The first ``k`` indices by nonincreasing weight.

    ``certified`` is True when no index touching a coordinate beyond
    ``dim_used`` can be cheaper than (or tied with) the last listed one.
    """

    items: tuple[RearrangementItem, ...]
    certified: bool
    dim_used: int

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, j):
        return self.items[j]

    @property
    def indices(self) -> list[MultiIndex]:
        return [it.index for it in self.items]

    @property
    def costs(self) -> list[float]:
        return [it.cost for it in self.items]

    @property
    def weights(self) -> list[float]:
        return [it.weight for it in self.items]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "cost", "weight", "index"])
        for r, it in enumerate(self.items, start=1):
            w.writerow([r, f"{it.cost:.17g}", f"{it.weight:.17g}", str(it.index)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "dim_used": self.dim_used,
            "items": [
                {"rank": r, "cost": it.cost, "weight": it.weight, "index": str(it.index)}
                for r, it in enumerate(self.items, start=1)
            ],
        }


def _group_sorted(items: list[RearrangementItem]) -> list[RearrangementItem]:
    """Reorder runs of tied costs by (degree, entries)."""
    out: list[RearrangementItem] = []
    j = 0
    while j < len(items):
        c0 = items[j].cost
        k = j + 1
        while k < len(items) and items[k].cost <= c0 + TIE_RTOL * abs(c0):
            k += 1
        out.extend(sorted(items[j:k], key=lambda it: it.index.sort_key()))
        j = k
    return out


def _best_first(inv: Sequence[float], k: int, max_pops: int) -> list[RearrangementItem]:
    """k cheapest indices supported in ``1..len(inv)``, plus any ties at the boundary.

    Canonical parenting: every gamma != 0 has the parent ``gamma - e_m`` with
    ``m = max support``.  Children ``gamma + e_j`` (``j >= m``) have costs
    nondecreasing in ``j``, so only the first child and the next sibling are
    pushed per pop.
    """
    dim = len(inv)

    def node_cost(entries):
        return math.fsum(v * inv[i - 1] for i, v in entries)

    heap: list = [(0.0, 0, (), ())]
    popped: list[RearrangementItem] = []
    limit = math.inf
    pops = 0
    while heap:
        c, deg, entries, _ = heap[0]
        if len(popped) >= k and c > limit:
            break
        heapq.heappop(heap)
        pops += 1
        if pops > max_pops:
            raise ResourceLimit(f"enumeration exceeded {max_pops} popped nodes")
        popped.append(RearrangementItem(MultiIndex(entries), c))
        if len(popped) == k:
            limit = c + TIE_RTOL * abs(c)
        if not entries:
            if dim >= 1:
                child = ((1, 1),)
                heapq.heappush(heap, (node_cost(child), 1, child, ()))
            continue
        m, v = entries[-1]
        child = entries[:-1] + ((m, v + 1),)
        heapq.heappush(heap, (node_cost(child), deg + 1, child, ()))
        if m < dim:
            base = entries[:-1] + (((m, v - 1),) if v > 1 else ())
            sib = base + ((m + 1, 1),)
            heapq.heappush(heap, (node_cost(sib), deg, sib, ()))
    return popped


def enumerate_rearrangement(
    s: Spectrum,
    k: int,
    *,
    max_window: int | None = None,
    max_pops: int = MAX_POPS,
) -> RearrangementList:
    """First ``k`` indices of a nonincreasing rearrangement of the weights.

    The search runs in a coordinate window ``1..D`` that doubles until the
    k-th cost is strictly below ``1 / lam_b_{D+1}``, the cheapest cost any
    index outside the window can have.  When the spectrum cannot deliver
    that (constant ``lam_b``, or an exhausted table) the window result is
    returned with ``certified=False``.  Ties are ordered by total degree,
    then by the sparse entries.
    """
    if k < 1:
        raise BadParams("k must be >= 1")
    top = s.max_index if max_window is None else min(s.max_index, max_window)
    if top == math.inf:
        top = DEFAULT_MAX_WINDOW
    top = int(top)

    if s.weighted_is_constant:
        window = min(top, k)
        inv = [s.inverse_weighted(i) for i in range(1, window + 1)]
        items = _group_sorted(_best_first(inv, k, max_pops))[:k]
        return RearrangementList(tuple(items), False, window)

    window = min(top, 8)
    inv = [s.inverse_weighted(i) for i in range(1, window + 1)]
    while True:
        items = _group_sorted(_best_first(inv, k, max_pops))[:k]
        last = items[-1].cost
        threshold = last + TIE_RTOL * abs(last)
        if window + 1 <= s.max_index:
            outside = s.inverse_weighted(window + 1)
        else:
            # lam_b nonincreasing: lam_b_{D+1} <= lam_b_D
            outside = inv[-1]
        if threshold < outside:
            return RearrangementList(tuple(items), True, window)
        if window >= top:
            return RearrangementList(tuple(items), False, window)
        new = min(2 * window, top)
        inv.extend(s.inverse_weighted(i) for i in range(window + 1, new + 1))
        window = new


# ---------------------------------------------------------------------------
# Anisotropic total-degree sets


@dataclass(frozen=True)
class TDIndexSet:
    a: tuple[float, ...]
    members: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, nu) -> bool:
        return tuple(nu) in set(self.members)

    @property
    def dim(self) -> int:
        return len(self.a)

    def multi_indices(self) -> list[MultiIndex]:
        return [MultiIndex.from_dense(nu) for nu in self.members]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "cost", "index"])
        for r, nu in enumerate(self.members, start=1):
            c = math.fsum(ai * v for ai, v in zip(self.a, nu))
            w.writerow([r, f"{c:.17g}", str(MultiIndex.from_dense(nu))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"a": list(self.a), "members": [list(nu) for nu in self.members]}


def _check_td_weights(a: Sequence[float]) -> tuple[float, ...]:
    a = tuple(float(x) for x in a)
    if not a:
        raise BadParams("weight vector must be nonempty")
    if any(not (math.isfinite(x) and x > 0) for x in a):
        raise BadParams("TD weights must be positive and finite")
    if any(a[i] > a[i + 1] for i in range(len(a) - 1)):
        raise BadParams("TD weights must be nondecreasing")
    return a


def td_size_bounds(a: Sequence[float]) -> tuple[float, float]:
    """``(prod 1/(a_i i), prod (1/(a_i i) + 1))`` for nondecreasing ``a``."""
    a = _check_td_weights(a)
    lo = hi = 1.0
    for i, ai in enumerate(a, start=1):
        r = 1.0 / (ai * i)
        lo *= r
        hi *= r + 1.0
    return lo, hi


def td_index_set(a: Sequence[float], *, cap: float = 1e7) -> TDIndexSet:
    """All ``nu`` in N_0^d with ``sum a_i nu_i <= 1``, graded-lex sorted.

    The budget test allows a relative slack of ``TIE_RTOL`` so that members
    sitting exactly on the boundary are not lost to rounding.
    """
    a = _check_td_weights(a)
    if td_size_bounds(a)[1] > cap:
        raise SetTooLarge(f"size bound exceeds cap {cap:g}")
    d = len(a)
    budget = 1.0 + TIE_RTOL
    out: list[tuple[int, ...]] = []
    cur = [0] * d

    def rec(i: int, used: float) -> None:
        if i == d:
            out.append(tuple(cur))
            return
        n = 0
        while used + n * a[i] <= budget:
            cur[i] = n
            rec(i + 1, used + n * a[i])
            n += 1
        cur[i] = 0

    rec(0, 0.0)
    out.sort(key=lambda nu: (sum(nu), tuple(-v for v in nu)))
    return TDIndexSet(a, tuple(out))


def s_epsilon_set(s: Spectrum, eps: float, *, cap: float = 1e7) -> TDIndexSet:
    """Indices with ``sum gamma_i / lam_b_i <= 1 / eps**2`` as a TD set.

    Coordinates beyond the effective dimension cannot enter the set; when
    even ``lam_b_1 < eps**2`` the set is just ``{0}``.
    """
    d = effective_dimension(s, eps)
    if d == math.inf:
        raise InfiniteEffectiveDimension(f"lam_b never drops below eps^2 = {eps * eps:g}")
    if isinstance(d, AtLeast):
        raise InfiniteEffectiveDimension(
            f"effective dimension exceeds the {int(d)} tabulated eigenvalues"
        )
    a = [eps * eps * s.inverse_weighted(i) for i in range(1, d + 1)]
    return td_index_set(a, cap=cap)


def brute_force_rearrangement(inv: Sequence[float], box: int) -> list[RearrangementItem]:
    """Every index in ``{0..box}^d`` sorted by (cost, degree, entries).

    Independent of the lattice search; used as a test oracle.
    """
    import itertools

    items = []
    for nu in itertools.product(range(box + 1), repeat=len(inv)):
        g = MultiIndex.from_dense(nu)
        items.append(RearrangementItem(g, math.fsum(v * c for v, c in zip(nu, inv))))
    items.sort(key=lambda it: it.cost)
    return _group_sorted(items)


def is_downward_closed(indices: Iterable[MultiIndex]) -> bool:
    members = set(indices)
    return all(p in members for g in members for p in g.decrements())
