"""Adaptive m-widths, the bound curves that bracket them, and Stesin's formula.

The adaptive m-width of the Lipschitz unit ball equals ``u_{pi(m+1)}``, the
(m+1)-st largest Sobolev weight.  Bound curves are closed forms in ``s``;
:func:`verify_bounds` checks them densely against the enumerated weights
and reports the first ``s`` from which each inequality holds.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadExponents, BadParams
from .index_sets import RearrangementList, enumerate_rearrangement
from .spectrum import Spectrum

LOWER_THM = "lower-algebraic"
UPPER_ALG = "upper-algebraic"
UPPER_EXP = "upper-exponential"
UPPER_DEXP = "upper-double-exponential"
SHARP_EXP = "sharp-exponential"

UPPER_KINDS = (UPPER_ALG, UPPER_EXP, UPPER_DEXP)
LOWER_KINDS = (LOWER_THM, SHARP_EXP)


@dataclass(frozen=True)
class WidthValue:
    theta: float
    certified: bool

    def __float__(self) -> float:
        return self.theta


@dataclass(frozen=True)
class WidthCurve:
    m_values: tuple[int, ...]
    theta: tuple[float, ...]
    certified: bool

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "theta", "certified"])
        flag = "true" if self.certified else "false"
        for m, t in zip(self.m_values, self.theta):
            w.writerow([m, f"{t:.17g}", flag])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"m": list(self.m_values), "theta": list(self.theta), "certified": self.certified}


def adaptive_m_width(s: Spectrum, m: int) -> WidthValue:
    """``u_{pi(m+1)}`` with the enumeration's certification flag."""
    if m < 1:
        raise BadParams("m must be >= 1")
    r = enumerate_rearrangement(s, m + 1)
    return WidthValue(r[m].weight, r.certified)


def width_curve(s: Spectrum, m_values: Sequence[int]) -> WidthCurve:
    """Widths at several ``m`` from a single enumeration."""
    ms = tuple(int(m) for m in m_values)
    if not ms or min(ms) < 1:
        raise BadParams("m values must be >= 1")
    r = enumerate_rearrangement(s, max(ms) + 1)
    return WidthCurve(ms, tuple(r[m].weight for m in ms), r.certified)


def geometric_grid(m_max: int) -> list[int]:
    """Powers of two up to ``m_max``."""
    out, m = [], 1
    while m <= m_max:
        out.append(m)
        m *= 2
    return out


# ---------------------------------------------------------------------------
# Bound curves


@dataclass(frozen=True)
class BoundCurve:
    """A closed-form curve sampled on ``s_values``.

    ``s_bar`` is the first ``s`` from which the inequality was observed to
    hold through the sampled range, or None when unknown.
    """

    kind: str
    params: dict
    s_values: np.ndarray
    values: np.ndarray
    s_bar: int | None = None

    @property
    def is_lower(self) -> bool:
        return self.kind in LOWER_KINDS

    def evaluate(self, s) -> np.ndarray:
        return curve_values(self.kind, self.params, s)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "value"])
        for sv, v in zip(self.s_values, self.values):
            w.writerow([int(sv), f"{v:.17g}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "s": [int(v) for v in self.s_values],
            "values": [float(v) for v in self.values],
            "s_bar": self.s_bar,
        }


def _positive(params: dict, *names: str) -> None:
    for n in names:
        v = params.get(n)
        if v is None:
            raise BadParams(f"missing parameter {n!r}")
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise BadParams(f"parameter {n!r} must be positive and finite, got {v!r}")


def _check_params(kind: str, params: dict) -> None:
    if kind == LOWER_THM:
        _positive(params, "C", "p")
    elif kind == UPPER_ALG:
        _positive(params, "alpha", "delta", "eta")
    elif kind == UPPER_EXP:
        _positive(params, "alpha", "beta", "delta")
    elif kind == UPPER_DEXP:
        _positive(params, "delta", "eta")
    elif kind == SHARP_EXP:
        _positive(params, "alpha", "beta", "delta", "prefactor")
        if params["delta"] >= params["beta"]:
            raise BadParams("sharp exponential bound needs delta < beta")
    else:
        raise BadParams(f"unknown curve kind {kind!r}")


def curve_values(kind: str, params: dict, s) -> np.ndarray:
    """Evaluate a bound curve at ``s`` (natural logarithms throughout)."""
    _check_params(kind, params)
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        if kind == LOWER_THM:
            return params["C"] * s ** (-1.0 / (2 * params["p"]))
        if kind == SHARP_EXP:
            a, b, d = params["alpha"], params["beta"], params["delta"]
            rate = 0.5 * a ** (1 / (b + 1)) * ((b + 1) / (b - d)) ** (1 / (1 + 1 / b))
            return params["prefactor"] * np.exp(-rate * np.log1p(s) ** (1 / (1 + 1 / b)))
        ls = np.log(s)
        if kind == UPPER_ALG:
            a, d = params["alpha"], params["delta"]
            return params["eta"] * ls ** (-1.0 / (2 * (1 / a + d)))
        if kind == UPPER_EXP:
            a, b, d = params["alpha"], params["beta"], params["delta"]
            rate = 0.5 * a ** (1 / (b + 1)) * ((b + 1) / (b + d)) ** (1 / (1 + 1 / b))
            return np.exp(-rate * ls ** (1 / (1 + 1 / b)))
        # UPPER_DEXP
        return np.exp(-params["eta"] * ls ** (1 / (1 + params["delta"])))


def lower_bound_constant(s: Spectrum, p: int) -> float:
    """``0.5 * (prod_{i<=p} lam_b_i / i) ** (1 / (2p))``, computed in logs."""
    if p < 1:
        raise BadParams("p must be >= 1")
    logsum = math.fsum(s.log_weighted(i) - math.log(i) for i in range(1, p + 1))
    return 0.5 * math.exp(logsum / (2 * p))


def _as_grid(s_values) -> np.ndarray:
    arr = np.asarray(list(s_values) if not isinstance(s_values, np.ndarray) else s_values)
    if arr.size == 0 or np.any(arr < 1) or np.any(arr != np.round(arr)):
        raise BadParams("s values must be integers >= 1")
    return arr.astype(np.int64)


def _holds_from(ok: np.ndarray, s: np.ndarray) -> int | None:
    """Smallest ``s[j]`` such that ``ok[j:]`` is all true."""
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return int(s[0])
    if bad[-1] == len(ok) - 1:
        return None
    return int(s[bad[-1] + 1])


def lower_bound_curve(
    s: Spectrum, p: int, s_values, *, rearrangement: RearrangementList | None = None
) -> BoundCurve:
    """``C s**(-1/(2p))`` on ``s_values`` with an empirical threshold.

    ``s_bar`` is located against the enumerated ``u_{pi(s+1)}`` on the
    given grid.
    """
    grid = _as_grid(s_values)
    params = {"C": lower_bound_constant(s, p), "p": int(p)}
    vals = curve_values(LOWER_THM, params, grid)
    r = rearrangement or enumerate_rearrangement(s, int(grid.max()) + 1)
    u = np.array([r[int(k)].weight for k in grid])
    return BoundCurve(LOWER_THM, params, grid, vals, _holds_from(u >= vals, grid))


def upper_bound_curve(kind: str, params: dict, s_values) -> BoundCurve:
    """One of the three upper regimes; ``s_bar`` is left unknown."""
    if kind not in UPPER_KINDS:
        raise BadParams(f"unknown upper bound kind {kind!r}")
    grid = _as_grid(s_values)
    if grid.min() < 2:
        raise BadParams("upper bounds need s >= 2")
    return BoundCurve(kind, dict(params), grid, curve_values(kind, params, grid))


def sharp_exponential_lower(alpha: float, beta: float, delta: float, s, prefactor: float = 1.0):
    params = {"alpha": alpha, "beta": beta, "delta": delta, "prefactor": prefactor}
    out = curve_values(SHARP_EXP, params, s)
    return float(out) if np.ndim(s) == 0 else out


def sharp_exponential_curve(alpha, beta, delta, s_values, prefactor: float = 1.0) -> BoundCurve:
    params = {"alpha": alpha, "beta": beta, "delta": delta, "prefactor": prefactor}
    grid = _as_grid(s_values)
    return BoundCurve(SHARP_EXP, params, grid, curve_values(SHARP_EXP, params, grid))


# ---------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class CurveVerdict:
    kind: str
    params: dict
    holds_from: int | None
    max_violation: float
    max_violation_after: float

    @property
    def holds(self) -> bool:
        return self.holds_from is not None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "status": "holds-from" if self.holds else "fails",
            "holds_from": self.holds_from,
            "max_violation": self.max_violation,
            "max_violation_after": self.max_violation_after,
        }


@dataclass(frozen=True)
class VerificationReport:
    k_max: int
    certified: bool
    verdicts: tuple[CurveVerdict, ...] = field(default_factory=tuple)

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "k_max": self.k_max,
            "certified": self.certified,
            "curves": [v.to_dict() for v in self.verdicts],
        }


def enumerated_weights(s: Spectrum, k_max: int) -> tuple[np.ndarray, bool]:
    """``u_{pi(s+1)}`` for ``s = 1..k_max`` (entry ``s-1``) and the certificate."""
    r = enumerate_rearrangement(s, k_max + 1)
    return np.array(r.weights[1:]), r.certified


def check_curve(kind: str, params: dict, u: np.ndarray, s_first: int = 1) -> CurveVerdict:
    """Compare a curve with ``u[s-1] = u_{pi(s+1)}`` over ``s = s_first..len(u)``."""
    s = np.arange(s_first, len(u) + 1)
    uu = u[s_first - 1:]
    vals = curve_values(kind, params, s)
    gap = vals - uu if kind in LOWER_KINDS else uu - vals
    ok = gap <= 0
    hf = _holds_from(ok, s)
    worst = float(max(gap.max(), 0.0))
    after = 0.0 if hf is None else float(max(gap[hf - s_first:].max(), 0.0))
    return CurveVerdict(kind, dict(params), hf, worst, after)


def verify_bounds(s: Spectrum, curves: Sequence[BoundCurve | tuple[str, dict]], k_max: int) -> VerificationReport:
    """Check every curve at every integer ``s`` in ``1..k_max``.

    Upper curves start at ``s = 2`` where ``log s > 0``.  Lower curves hold
    when ``u >= curve``, upper curves when ``u <= curve``.
    """
    if k_max < 2:
        raise BadParams("k_max must be >= 2")
    u, cert = enumerated_weights(s, k_max)
    out = []
    for c in curves:
        kind, params = (c.kind, c.params) if isinstance(c, BoundCurve) else c
        out.append(check_curve(kind, params, u, 1 if kind in LOWER_KINDS else 2))
    return VerificationReport(k_max, cert, tuple(out))


def tune_eta(kind: str, params: dict, u: np.ndarray, s_lo: int, s_hi: int) -> float:
    """Smallest ``eta`` for which an eta-scaled upper curve dominates ``u`` on ``[s_lo, s_hi]``.

    Only the calibration window is used; agreement beyond it is then a
    genuine test of the decay rate.
    """
    if kind != UPPER_ALG:
        raise BadParams("eta tuning applies to the algebraic regime")
    if not 2 <= s_lo <= s_hi <= len(u):
        raise BadParams("calibration window out of range")
    s = np.arange(s_lo, s_hi + 1)
    shape = curve_values(kind, {**params, "eta": 1.0}, s)
    return float(np.max(u[s_lo - 1:s_hi] / shape))


def find_prefactor(
    alpha: float,
    beta: float,
    delta: float,
    u: np.ndarray,
    *,
    candidates: Sequence[float] = (10.0, 5.0, 2.0, 1.0, 0.5, 0.2, 0.1),
    s_limit: int | None = None,
) -> tuple[float, int] | None:
    """Largest candidate prefactor whose sharp lower curve holds from some ``s* <= s_limit``."""
    s_limit = len(u) if s_limit is None else s_limit
    for c in sorted(candidates, reverse=True):
        v = check_curve(SHARP_EXP, {"alpha": alpha, "beta": beta, "delta": delta, "prefactor": c}, u)
        if v.holds and v.holds_from <= s_limit:
            return c, v.holds_from
    return None


# ---------------------------------------------------------------------------
# Kolmogorov widths of weighted balls


def _check_stesin(w, p: float, q: float, m: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise BadParams("weights must be a nonempty vector of positive reals")
    if not (q >= 1 and p > q):
        raise BadExponents(f"need 1 <= q < p <= inf, got q={q}, p={p}")
    if not 0 <= m < w.size:
        raise BadParams(f"need 0 <= m < N={w.size}, got {m}")
    return w


def stesin_width(w, p: float, q: float, m: int) -> float:
    """Kolmogorov m-width of the ``w``-weighted ``l^p`` ball in ``l^q``.

    The value is ``(sum of the N-m smallest w**r) ** (1/q - 1/p)`` with
    ``r = pq/(p-q)``; for ``p = inf``, ``r = q`` and the exponent is ``1/q``.
    """
    w = _check_stesin(w, p, q, m)
    if math.isinf(p):
        r, expo = q, 1.0 / q
    else:
        r, expo = p * q / (p - q), 1.0 / q - 1.0 / p
    smallest = np.sort(w)[: w.size - m]
    # scale out the largest term before powering to avoid overflow
    top = smallest.max()
    total = math.fsum((smallest / top) ** r)
    return float(top * total**expo)


def stesin_tail_sum(w, p: float, m: int) -> float:
    """``(sum_{j>m} w_(j)**(2p/(p-2))) ** ((p-2)/(2p))`` with ``w_(j)`` nonincreasing."""
    w = _check_stesin(w, p, 2.0, m)
    tail = np.sort(w)[::-1][m:]
    if math.isinf(p):
        r, expo = 2.0, 0.5
    else:
        r, expo = 2 * p / (p - 2), (p - 2) / (2 * p)
    top = tail[0]
    return float(top * math.fsum((tail / top) ** r) ** expo)
