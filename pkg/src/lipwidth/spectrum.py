"""PCA eigenvalue models of a centered Gaussian measure.

A :class:`Spectrum` couples the eigenvalues ``lam_i`` of the covariance
operator with a weight sequence ``b_i`` in (0, 1] and exposes the weighted
eigenvalues ``lam_b_i = lam_i / b_i**2``.  Closed-form families answer
queries at any index; ``dim_cap`` only bounds what gets materialized.

Monotonicity checks run on logarithms, and reciprocals overflow to ``inf``
rather than raising, so the double-exponential family (whose eigenvalues
underflow to 0.0 from i = 7 on for alpha = 1) stays usable.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

from .errors import BadParams, BadWeight, NonMonotone, OutOfRange

__all__ = [
    "Algebraic",
    "Exponential",
    "DoubleExponential",
    "Explicit",
    "Spectrum",
    "L2Verdict",
    "ValidationReport",
    "AtLeast",
    "make_spectrum",
    "weighted_eigenvalue",
    "validate_assumption",
    "effective_dimension",
    "spectrum_from_dict",
]


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Algebraic:
    """lam_i = i**(-alpha)."""

    alpha: float

    def log_eigenvalue(self, i: int) -> float:
        return -self.alpha * math.log(i)

    def eigenvalue(self, i: int) -> float:
        return float(i) ** -self.alpha

    def inverse(self, i: int) -> float:
        return float(i) ** self.alpha


@dataclass(frozen=True)
class Exponential:
    """lam_i = exp(-alpha * i**beta)."""

    alpha: float
    beta: float

    def log_eigenvalue(self, i: int) -> float:
        return -self.alpha * float(i) ** self.beta

    def eigenvalue(self, i: int) -> float:
        return _exp(self.log_eigenvalue(i))

    def inverse(self, i: int) -> float:
        return _exp(-self.log_eigenvalue(i))


@dataclass(frozen=True)
class DoubleExponential:
    """lam_i = exp(-exp(alpha * i))."""

    alpha: float

    def log_eigenvalue(self, i: int) -> float:
        try:
            return -math.exp(self.alpha * i)
        except OverflowError:
            return -math.inf

    def eigenvalue(self, i: int) -> float:
        return _exp(self.log_eigenvalue(i))

    def inverse(self, i: int) -> float:
        return _exp(-self.log_eigenvalue(i))


@dataclass(frozen=True)
class Explicit:
    """Tabulated eigenvalues lam_1, ..., lam_N."""

    values: tuple[float, ...]

    def __init__(self, values: Sequence[float]):
        object.__setattr__(self, "values", tuple(float(v) for v in values))

    def log_eigenvalue(self, i: int) -> float:
        if not 1 <= i <= len(self.values):
            raise OutOfRange(f"eigenvalue index {i} outside table of length {len(self.values)}")
        return math.log(self.values[i - 1])

    def eigenvalue(self, i: int) -> float:
        if not 1 <= i <= len(self.values):
            raise OutOfRange(f"eigenvalue index {i} outside table of length {len(self.values)}")
        return self.values[i - 1]

    def inverse(self, i: int) -> float:
        return 1.0 / self.eigenvalue(i)


Family = Union[Algebraic, Exponential, DoubleExponential, Explicit]

ONES = "ones"
SQRT_LAMBDA = "sqrt-lambda"


@dataclass(frozen=True)
class Spectrum:
    family: Family
    b: Union[str, tuple[float, ...]] = ONES
    dim_cap: int = 1

    def __post_init__(self):
        if not isinstance(self.b, str):
            object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        elif self.b not in (ONES, SQRT_LAMBDA):
            raise BadParams(f"unknown b choice {self.b!r}")

    # ---- size / range -------------------------------------------------
    @property
    def max_index(self) -> float:
        """Largest coordinate the spectrum can answer (``inf`` for formulas)."""
        n = math.inf
        if isinstance(self.family, Explicit):
            n = len(self.family.values)
        if not isinstance(self.b, str):
            n = min(n, len(self.b))
        return n

    @property
    def is_closed_form(self) -> bool:
        return self.max_index == math.inf

    def _check(self, i: int) -> None:
        if i < 1 or i > self.max_index:
            raise OutOfRange(f"index {i} outside 1..{self.max_index}")

    # ---- values -------------------------------------------------------
    def log_eigenvalue(self, i: int) -> float:
        self._check(i)
        return self.family.log_eigenvalue(i)

    def eigenvalue(self, i: int) -> float:
        """Unweighted PCA eigenvalue lam_i (may underflow to 0.0)."""
        self._check(i)
        return self.family.eigenvalue(i)

    def b_value(self, i: int) -> float:
        self._check(i)
        if self.b == ONES:
            return 1.0
        if self.b == SQRT_LAMBDA:
            return math.sqrt(self.eigenvalue(i))
        return self.b[i - 1]

    def log_weighted(self, i: int) -> float:
        self._check(i)
        if self.b == SQRT_LAMBDA:
            return 0.0
        lg = self.family.log_eigenvalue(i)
        if self.b == ONES:
            return lg
        return lg - 2.0 * math.log(self.b[i - 1])

    def weighted(self, i: int) -> float:
        self._check(i)
        if self.b == SQRT_LAMBDA:
            return 1.0
        lam = self.family.eigenvalue(i)
        if self.b == ONES:
            return lam
        if lam == 0.0:
            return _exp(self.log_weighted(i))
        return lam / self.b[i - 1] ** 2

    def inverse_weighted(self, i: int) -> float:
        """1 / lam_b_i, the cost of one unit in coordinate i (``inf`` on overflow)."""
        self._check(i)
        if self.b == SQRT_LAMBDA:
            return 1.0
        if self.b == ONES:
            return self.family.inverse(i)
        return self.b[i - 1] ** 2 * self.family.inverse(i)

    @property
    def weighted_is_constant(self) -> bool:
        """True when lam_b provably never decays (b = sqrt(lam))."""
        return self.b == SQRT_LAMBDA and self.is_closed_form

    def weighted_table(self, n: int | None = None) -> list[float]:
        n = self.dim_cap if n is None else n
        return [self.weighted(i) for i in range(1, n + 1)]

    # ---- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        fam = self.family
        if isinstance(fam, Algebraic):
            name, params = "algebraic", {"alpha": fam.alpha}
        elif isinstance(fam, Exponential):
            name, params = "exponential", {"alpha": fam.alpha, "beta": fam.beta}
        elif isinstance(fam, DoubleExponential):
            name, params = "double-exponential", {"alpha": fam.alpha}
        else:
            name, params = "explicit", {"values": list(fam.values)}
        b = self.b if isinstance(self.b, str) else list(self.b)
        return {"family": name, "params": params, "b": b, "dim_cap": self.dim_cap}


def spectrum_from_dict(obj: dict, *, check: bool = True) -> Spectrum:
    """Inverse of :meth:`Spectrum.to_dict`."""
    try:
        name = obj["family"]
        params = obj.get("params", {})
        if name == "algebraic":
            fam: Family = Algebraic(float(params["alpha"]))
        elif name == "exponential":
            fam = Exponential(float(params["alpha"]), float(params["beta"]))
        elif name == "double-exponential":
            fam = DoubleExponential(float(params["alpha"]))
        elif name == "explicit":
            fam = Explicit(params["values"])
        else:
            raise BadParams(f"unknown spectrum family {name!r}")
        b = obj.get("b", ONES)
        dim_cap = obj.get("dim_cap")
        if dim_cap is None:
            dim_cap = len(fam.values) if isinstance(fam, Explicit) else 1
    except (KeyError, TypeError) as exc:
        raise BadParams(f"malformed spectrum object: {exc}") from exc
    if check:
        return make_spectrum(fam, b, int(dim_cap))
    return Spectrum(fam, b if isinstance(b, str) else tuple(b), int(dim_cap))


def make_spectrum(family: Family, b: Union[str, Sequence[float]] = ONES, dim_cap: int = 1) -> Spectrum:
    """Build a spectrum and enforce positivity, b in (0, 1] and monotone lam_b.

    Raises
    ------
    BadParams
        Non-positive family parameters or ``dim_cap < 1``.
    BadWeight
        Some b_i outside (0, 1].
    NonMonotone
        lam_b fails to be nonincreasing on 1..dim_cap.
    """
    if dim_cap < 1:
        raise BadParams("dim_cap must be >= 1")
    if isinstance(family, (Algebraic, DoubleExponential)):
        if not family.alpha > 0:
            raise BadParams("alpha must be > 0")
    elif isinstance(family, Exponential):
        if not (family.alpha > 0 and family.beta > 0):
            raise BadParams("alpha and beta must be > 0")
    elif isinstance(family, Explicit):
        if not family.values:
            raise BadParams("explicit spectrum needs at least one eigenvalue")
        for v in family.values:
            if not (math.isfinite(v) and v > 0):
                raise BadParams(f"eigenvalues must be positive and finite, got {v}")
        if dim_cap > len(family.values):
            raise BadParams("dim_cap exceeds the explicit eigenvalue table")
    else:
        raise BadParams(f"unknown family {family!r}")

    if not isinstance(b, str):
        b = tuple(float(v) for v in b)
        if dim_cap > len(b):
            raise BadParams("dim_cap exceeds the explicit b table")
    spec = Spectrum(family, b, dim_cap)

    problems = _weight_problems(spec)
    if problems:
        raise BadWeight(problems[0])
    problems = _monotonicity_problems(spec)
    if problems:
        raise NonMonotone(problems[0])
    return spec


def _weight_problems(spec: Spectrum) -> list[str]:
    out = []
    n = spec.dim_cap if spec.max_index == math.inf else int(spec.max_index)
    if isinstance(spec.b, tuple):
        for i, v in enumerate(spec.b, start=1):
            if not (math.isfinite(v) and 0 < v <= 1):
                out.append(f"b_{i} = {v} outside (0, 1]")
    elif spec.b == SQRT_LAMBDA:
        # closed families have lam_1 <= 1 and decreasing lam, so only tables need a scan
        if isinstance(spec.family, Explicit):
            for i in range(1, n + 1):
                if spec.eigenvalue(i) > 1:
                    out.append(f"b_{i} = sqrt(lam_{i}) = {math.sqrt(spec.eigenvalue(i))} exceeds 1")
    return out


def _monotonicity_problems(spec: Spectrum) -> list[str]:
    if spec.b == SQRT_LAMBDA or (spec.b == ONES and not isinstance(spec.family, Explicit)):
        return []
    n = spec.dim_cap if spec.max_index == math.inf else int(spec.max_index)
    vals = [spec.log_weighted(i) for i in range(1, n + 1)]
    return [
        f"lam_b_{i + 1} > lam_b_{i}"
        for i in range(1, n)
        if vals[i] > vals[i - 1]
    ]


def weighted_eigenvalue(s: Spectrum, i: int) -> float:
    """lam_b_i; exact formula for closed families, table lookup otherwise."""
    return s.weighted(i)


class L2Verdict(str, enum.Enum):
    HOLDS = "holds"
    HOLDS_VACUOUSLY = "holds-vacuously"
    FAILS = "fails"
    UNKNOWN = "unknown-by-truncation"


@dataclass(frozen=True)
class ValidationReport:
    nonincreasing_ok: bool
    b_range_ok: bool
    b_l2_ok: L2Verdict
    messages: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.nonincreasing_ok and self.b_range_ok and self.b_l2_ok is not L2Verdict.FAILS

    def to_dict(self) -> dict:
        return {
            "nonincreasing_ok": self.nonincreasing_ok,
            "b_range_ok": self.b_range_ok,
            "b_l2_ok": self.b_l2_ok.value,
            "messages": list(self.messages),
        }


def _eigenvalues_summable(fam: Family) -> bool | None:
    if isinstance(fam, Algebraic):
        return fam.alpha > 1
    if isinstance(fam, (Exponential, DoubleExponential)):
        return True
    return None


def validate_assumption(s: Spectrum, codomain_infinite: bool = False) -> ValidationReport:
    """Check monotonicity of lam_b, the range of b, and b in l2 when needed.

    Never raises; every finding is recorded in the report.
    """
    messages: list[str] = []
    weight_msgs = _weight_problems(s)
    mono_msgs = _monotonicity_problems(s)
    messages += weight_msgs + mono_msgs

    if _eigenvalues_summable(s.family) is False:
        messages.append("eigenvalues are not summable; not the covariance of a Gaussian measure")

    if not codomain_infinite:
        verdict = L2Verdict.HOLDS_VACUOUSLY
    elif s.b == ONES:
        verdict = L2Verdict.FAILS
        messages.append("b = 1 is not square-summable")
    elif s.b == SQRT_LAMBDA:
        # sum b_i^2 = sum lam_i
        summable = _eigenvalues_summable(s.family)
        if summable is None:
            verdict = L2Verdict.UNKNOWN
        else:
            verdict = L2Verdict.HOLDS if summable else L2Verdict.FAILS
    else:
        verdict = L2Verdict.UNKNOWN
    if verdict is L2Verdict.UNKNOWN:
        messages.append("square-summability of b cannot be decided from a finite table")

    return ValidationReport(
        nonincreasing_ok=not mono_msgs,
        b_range_ok=not weight_msgs,
        b_l2_ok=verdict,
        messages=tuple(messages),
    )


class AtLeast(int):
    """Lower bound marker: the scan ran out of tabulated eigenvalues."""

    def __repr__(self) -> str:
        return f"AtLeast({int(self)})"


def effective_dimension(s: Spectrum, eps: float, *, max_scan: int = 10**7) -> int | float:
    """Smallest l >= 1 with lam_b_{l+1} < eps**2.

    Returns ``math.inf`` when lam_b provably never drops below ``eps**2``
    and :class:`AtLeast` when a finite table is exhausted first.
    """
    if not eps > 0:
        raise BadParams("eps must be > 0")
    thr = eps * eps
    if s.weighted_is_constant:
        return 1 if 1.0 < thr else math.inf
    top = s.max_index
    l = 1
    while True:
        if l + 1 > top:
            return AtLeast(int(top))
        if s.weighted(l + 1) < thr:
            return l
        l += 1
        if l > max_scan:
            raise BadParams(f"effective dimension exceeds scan limit {max_scan}")
