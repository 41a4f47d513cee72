"""Wiener-Hermite polynomial chaos: sampling, coefficients, projections, errors.

Operators act on the first ``D`` PCA coordinates ``x_i = <X, phi_i>``, which
are independent ``N(0, lam_i)``.  The scaled Hermite basis is
``H_{gamma,lam}(x) = prod_i H_{gamma_i}(x_i / sqrt(lam_i))`` and is
orthonormal in ``L2`` of that Gaussian measure.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import BadParams, DimensionMismatch, NonFiniteValue, QuadratureTooCoarse
from .hermite import capped_scaled_eval, gauss_hermite_rule, hermite_scaled_eval, tensor_rule
from .index_sets import MultiIndex, enumerate_rearrangement, sobolev_weight
from .spectrum import Spectrum, spectrum_from_dict

SCHEMA = "lipwidth/1"
Z95 = 1.96

FINITE_PC = "finite-pc"
NORM = "norm"
CAPPED = "capped"
CUSTOM = "custom"


# ---------------------------------------------------------------------------
# Sampling


def _generator(seed: int) -> np.random.Generator:
    if not (isinstance(seed, (int, np.integer)) and 0 <= seed < 2**64):
        raise BadParams("seed must be an integer in [0, 2**64)")
    return np.random.Generator(np.random.Philox(key=int(seed)))


def gaussian_sample(s: Spectrum, D: int, seed: int, n: int | None = None) -> np.ndarray:
    """Independent ``x_i ~ N(0, lam_i)``, ``i = 1..D``, from a Philox stream.

    Returns shape ``(D,)`` when ``n`` is None, else ``(n, D)``.  Rows are
    prefix-stable: row ``j`` is the same for every ``n > j``.
    """
    if D < 0:
        raise BadParams("dimension must be >= 0")
    sd = np.sqrt([s.eigenvalue(i) for i in range(1, D + 1)]) if D else np.zeros(0)
    z = _generator(seed).standard_normal((1 if n is None else n, D))
    x = z * sd
    return x[0] if n is None else x


# ---------------------------------------------------------------------------
# Expansions


def _vec(c) -> np.ndarray:
    v = np.atleast_1d(np.asarray(c, dtype=float))
    if v.ndim != 1:
        raise BadParams("coefficients must be scalars or vectors")
    return v


@dataclass(frozen=True, eq=False)
class PCExpansion:
    """Finite expansion ``sum_gamma Y_gamma H_{gamma,lam}`` with ``Y_gamma`` in R^K."""

    coeffs: Mapping[MultiIndex, np.ndarray]
    spectrum: Spectrum | None = None
    codomain_dim: int = 1

    def __post_init__(self):
        clean = {}
        for g, c in self.coeffs.items():
            v = _vec(c)
            if v.size != self.codomain_dim:
                raise DimensionMismatch(
                    f"coefficient of {g} has length {v.size}, expected {self.codomain_dim}"
                )
            clean[g] = v
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_terms(cls, terms: Mapping, spectrum: Spectrum | None = None) -> "PCExpansion":
        """Build from ``{MultiIndex | str: coeff}``; ``K`` is inferred."""
        items = {(MultiIndex.parse(g) if isinstance(g, str) else g): _vec(c) for g, c in terms.items()}
        k = next(iter(items.values())).size if items else 1
        return cls(items, spectrum, k)

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def support(self) -> list[MultiIndex]:
        return sorted(self.coeffs, key=MultiIndex.sort_key)

    @property
    def max_support(self) -> int:
        return max((g.max_support for g in self.coeffs), default=0)

    @property
    def degree(self) -> int:
        """Largest single-coordinate degree."""
        return max((v for g in self.coeffs for _, v in g.entries), default=0)

    def coefficient(self, g: MultiIndex) -> np.ndarray:
        return self.coeffs.get(g, np.zeros(self.codomain_dim))

    def norm_sq(self) -> float:
        """``||F||**2`` in L2 via Parseval."""
        return math.fsum(float(v @ v) for v in self.coeffs.values())

    def restrict(self, S: Iterable[MultiIndex]) -> "PCExpansion":
        keep = set(S)
        return PCExpansion({g: v for g, v in self.coeffs.items() if g in keep}, self.spectrum, self.codomain_dim)

    def evaluate(self, x, spectrum: Spectrum | None = None) -> np.ndarray:
        """Values at PCA coordinates ``x`` of shape ``(D,)`` or ``(N, D)``."""
        s = spectrum or self.spectrum
        if s is None:
            raise BadParams("evaluation needs a spectrum")
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] < self.max_support:
            raise DimensionMismatch(f"need {self.max_support} coordinates, got {pts.shape[1]}")
        out = np.zeros((pts.shape[0], self.codomain_dim))
        for g, v in self.coeffs.items():
            out += np.multiply.outer(np.atleast_1d(hermite_scaled_eval(g, pts, s)), v)
        return out[0] if single else out

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "spectrum_ref": None if self.spectrum is None else self.spectrum.to_dict(),
            "entries": [{"index": str(g), "coeff": [float(c) for c in self.coeffs[g]]} for g in self.support],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj: dict, spectrum: Spectrum | None = None) -> "PCExpansion":
        try:
            entries = obj["entries"]
            terms = {e["index"]: e["coeff"] for e in entries}
        except (KeyError, TypeError) as exc:
            raise BadParams(f"malformed expansion: {exc}") from exc
        ref = obj.get("spectrum_ref")
        if spectrum is None and ref is not None:
            spectrum = spectrum_from_dict(ref)
        return cls.from_terms(terms, spectrum)

    @classmethod
    def from_json(cls, text: str, spectrum: Spectrum | None = None) -> "PCExpansion":
        return cls.from_dict(json.loads(text), spectrum)


# ---------------------------------------------------------------------------
# Operators


@dataclass(frozen=True)
class OperatorSpec:
    """Operator on ``D`` PCA coordinates with values in R^K.

    ``evaluate`` maps a batch ``(N, D)`` to ``(N, K)``.  ``degree`` is the
    largest per-coordinate polynomial degree when the operator is a
    polynomial, else None; quadrature is only used when it is known.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    active_dim: int
    codomain_dim: int
    kind: str
    degree: int | None = None
    expansion: PCExpansion | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] < self.active_dim:
            raise DimensionMismatch(f"need {self.active_dim} coordinates, got {pts.shape[1]}")
        out = np.asarray(self.evaluate(pts[:, : self.active_dim]), dtype=float).reshape(len(pts), self.codomain_dim)
        if not np.all(np.isfinite(out)):
            raise NonFiniteValue("operator returned a non-finite value")
        return out[0] if single else out


def finite_pc_operator(E: PCExpansion, s: Spectrum) -> OperatorSpec:
    return OperatorSpec(
        evaluate=lambda x: E.evaluate(x, s),
        active_dim=E.max_support,
        codomain_dim=E.codomain_dim,
        kind=FINITE_PC,
        degree=E.degree,
        expansion=E,
    )


def custom_operator(fn, active_dim: int, codomain_dim: int = 1, degree: int | None = None) -> OperatorSpec:
    return OperatorSpec(fn, int(active_dim), int(codomain_dim), CUSTOM, degree)


def builtin_operator(kind: str, params: dict, s: Spectrum) -> OperatorSpec:
    """``finite-pc`` (``expansion``), ``norm`` (``dim``) or ``capped``.

    ``capped`` takes ``terms`` ({index: x_gamma}), ``R``, ``direction`` (a
    0-based codomain coordinate) and ``codomain_dim``; it evaluates
    ``e_direction * sum_gamma x_gamma H~_{gamma,R}(x_i / sqrt(lam_i))``.
    """
    if kind == FINITE_PC:
        E = params.get("expansion")
        if not isinstance(E, PCExpansion):
            raise BadParams("finite-pc needs an 'expansion'")
        return finite_pc_operator(E, s)
    if kind == NORM:
        D = int(params.get("dim", 0))
        if D < 1:
            raise BadParams("norm functional needs dim >= 1")
        s.eigenvalue(D)
        return OperatorSpec(
            lambda x: np.sqrt(np.sum(x * x, axis=1)), D, 1, NORM, None, params={"dim": D}
        )
    if kind == CAPPED:
        R = params.get("R")
        if not (isinstance(R, (int, float)) and R > 0):
            raise BadParams("capped operator needs R > 0")
        terms = {(MultiIndex.parse(g) if isinstance(g, str) else g): float(c) for g, c in params.get("terms", {}).items()}
        if not terms:
            raise BadParams("capped operator needs at least one term")
        K = int(params.get("codomain_dim", 1))
        j = int(params.get("direction", 0))
        if not 0 <= j < K:
            raise BadParams(f"direction {j} outside codomain of dimension {K}")
        D = max(g.max_support for g in terms)

        def ev(x):
            tot = np.zeros(len(x))
            for g, c in terms.items():
                tot += c * np.atleast_1d(capped_scaled_eval(g, R, x, s))
            out = np.zeros((len(x), K))
            out[:, j] = tot
            return out

        return OperatorSpec(ev, D, K, CAPPED, None, params={"terms": {str(g): c for g, c in terms.items()}, "R": R, "direction": j})
    raise BadParams(f"unknown operator kind {kind!r}")


# ---------------------------------------------------------------------------
# Coefficients


@dataclass(frozen=True)
class TensorQuadrature:
    nodes_per_dim: int | None = None


@dataclass(frozen=True)
class MonteCarlo:
    samples: int
    seed: int


@dataclass(frozen=True)
class CoefficientEstimate:
    value: np.ndarray
    half_width_95: np.ndarray
    samples_used: int


def _quad_nodes(F: OperatorSpec, gdeg: int, requested: int | None) -> int:
    if F.degree is None:
        raise QuadratureTooCoarse("operator degree unknown: quadrature exactness cannot be certified")
    need = max(1, math.ceil((F.degree + gdeg + 1) / 2))
    if requested is None:
        return need
    if requested < need:
        raise QuadratureTooCoarse(
            f"{requested} nodes are exact to degree {2 * requested - 1}, integrand has degree {F.degree + gdeg}"
        )
    return requested


def _check_support(F: OperatorSpec, indices: Sequence[MultiIndex]) -> None:
    for g in indices:
        if g.max_support > F.active_dim:
            raise DimensionMismatch(f"{g} uses coordinates beyond the operator's {F.active_dim} active ones")


def _basis_matrix(indices: Sequence[MultiIndex], x: np.ndarray, s: Spectrum) -> np.ndarray:
    return np.stack([np.broadcast_to(hermite_scaled_eval(g, x, s), (len(x),)) for g in indices], axis=1) if indices else np.zeros((len(x), 0))


def _estimate_many(F: OperatorSpec, indices: Sequence[MultiIndex], s: Spectrum, method):
    """Coefficient estimates ``(values (M, K), half widths (M, K), samples)``."""
    indices = list(indices)
    _check_support(F, indices)
    D = F.active_dim
    if isinstance(method, TensorQuadrature):
        gdeg = max((v for g in indices for _, v in g.entries), default=0)
        n = _quad_nodes(F, gdeg, method.nodes_per_dim)
        z, w = tensor_rule(gauss_hermite_rule(n), D)
        sd = np.sqrt([s.eigenvalue(i) for i in range(1, D + 1)]) if D else np.zeros(0)
        x = z * sd
        fx = F(x)
        B = _basis_matrix(indices, x, s)
        vals = (B * w[:, None]).T @ fx
        return vals, np.zeros_like(vals), len(w)
    if isinstance(method, MonteCarlo):
        if method.samples < 2:
            raise BadParams("Monte Carlo needs at least 2 samples")
        x = gaussian_sample(s, D, method.seed, method.samples)
        fx = F(x)
        B = _basis_matrix(indices, x, s)
        prod = B[:, :, None] * fx[:, None, :]
        vals = prod.mean(axis=0)
        hw = Z95 * prod.std(axis=0, ddof=1) / math.sqrt(method.samples)
        return vals, hw, method.samples
    raise BadParams(f"unknown method {method!r}")


def estimate_coefficient(F: OperatorSpec, gamma: MultiIndex, s: Spectrum, method) -> np.ndarray:
    """``Y_gamma = E[F(X) H_{gamma,lam}(X)]`` by tensor quadrature or Monte Carlo."""
    return _estimate_many(F, [gamma], s, method)[0][0]


def estimate_coefficient_ci(F: OperatorSpec, gamma: MultiIndex, s: Spectrum, method) -> CoefficientEstimate:
    v, hw, n = _estimate_many(F, [gamma], s, method)
    return CoefficientEstimate(v[0], hw[0], n)


def project(F: OperatorSpec, S: Iterable[MultiIndex], s: Spectrum, method) -> PCExpansion:
    """``F_S = sum_{gamma in S} Y_gamma H_{gamma,lam}`` with estimated coefficients."""
    S = sorted(set(S), key=MultiIndex.sort_key)
    if not S:
        return PCExpansion({}, s, F.codomain_dim)
    vals, _, _ = _estimate_many(F, S, s, method)
    return PCExpansion(dict(zip(S, vals)), s, F.codomain_dim)


# ---------------------------------------------------------------------------
# Errors and norms


@dataclass(frozen=True)
class ErrorEstimate:
    mean_square: float
    half_width_95: float
    samples_used: int
    method: str
    exact: float | None = None

    @property
    def error(self) -> float:
        return math.sqrt(self.mean_square)

    def to_dict(self) -> dict:
        return {
            "mean_square": self.mean_square,
            "half_width_95": self.half_width_95,
            "samples_used": self.samples_used,
            "method": self.method,
            "exact": self.exact,
        }


def parseval_distance_sq(E: PCExpansion, G: PCExpansion) -> float:
    keys = set(E.coeffs) | set(G.coeffs)
    return math.fsum(float(np.sum((E.coefficient(g) - G.coefficient(g)) ** 2)) for g in keys)


def l2_error(
    F: OperatorSpec,
    G: PCExpansion,
    s: Spectrum,
    mc_samples: int = 10_000,
    seed: int = 0,
    *,
    proposal_scale: float = 1.0,
) -> ErrorEstimate:
    """Monte Carlo estimate of ``E ||F(X) - G(X)||**2`` with a 95% interval.

    With ``proposal_scale = sigma > 1`` the points are drawn from the
    Gaussian with every standard deviation multiplied by ``sigma`` and
    reweighted by the density ratio.  For polynomial integrands this turns
    the polynomial tails of ``||F - G||**2`` into Gaussian ones, so the
    normal-approximation interval becomes reliable.  When ``F`` carries a
    finite expansion the exact Parseval value is filled in as well.
    """
    if mc_samples < 100:
        raise BadParams("mc_samples must be >= 100")
    if not (math.isfinite(proposal_scale) and proposal_scale >= 1.0):
        raise BadParams("proposal_scale must be >= 1")
    if G.codomain_dim != F.codomain_dim and len(G):
        raise DimensionMismatch("operator and expansion have different codomains")
    D = max(F.active_dim, G.max_support)
    x = proposal_scale * gaussian_sample(s, D, seed, mc_samples)
    diff = F(x)
    if len(G):
        diff = diff - G.evaluate(x, s)
    sq = np.sum(diff * diff, axis=1)
    if proposal_scale != 1.0 and D:
        sd2 = np.array([s.eigenvalue(i) for i in range(1, D + 1)])
        z2 = np.sum(x * x / sd2, axis=1)
        c = 1.0 - 1.0 / proposal_scale**2
        sq = sq * proposal_scale**D * np.exp(-0.5 * c * z2)
    if not np.all(np.isfinite(sq)):
        raise NonFiniteValue("non-finite squared error")
    ms = float(np.mean(sq))
    hw = Z95 * float(np.std(sq, ddof=1)) / math.sqrt(mc_samples)
    method = f"monte-carlo(seed={seed})"
    if proposal_scale != 1.0:
        method = f"importance-sampling(seed={seed}, scale={proposal_scale:g})"
    exact = parseval_distance_sq(F.expansion, G) if F.expansion is not None else None
    return ErrorEstimate(ms, hw, mc_samples, method, exact)


def sobolev_norm(E: PCExpansion, s: Spectrum) -> float:
    """``sqrt(sum u_gamma**-2 ||Y_gamma||**2)``."""
    return math.sqrt(math.fsum((1.0 / sobolev_weight(g, s) ** 2) * float(v @ v) for g, v in E.coeffs.items()))


# ---------------------------------------------------------------------------
# Best s-term errors


@dataclass(frozen=True)
class STermReport:
    s: int
    pi_error: float
    best_error: float
    brute_force_error: float | None
    u_next: float
    pi_indices: tuple[MultiIndex, ...]

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "pi_error": self.pi_error,
            "best_error": self.best_error,
            "brute_force_error": self.brute_force_error,
            "u_bound": self.u_next,
            "pi_indices": [str(g) for g in self.pi_indices],
        }


def optimal_s_term_error(E: PCExpansion, s_count: int, s: Spectrum, *, brute_force_limit: int = 12) -> STermReport:
    """Errors of keeping ``s_count`` terms of a finite expansion.

    ``pi_error`` keeps the first ``s_count`` indices of the global weight
    rearrangement; ``best_error`` keeps the ``s_count`` largest
    coefficients, which is the infimum over all index sets of that size.
    For supports of at most ``brute_force_limit`` indices the infimum is
    also found by trying every subset.  ``u_next`` is ``u_{pi(s+1)}``.
    """
    if s_count < 0:
        raise BadParams("s must be >= 0")
    r = enumerate_rearrangement(s, s_count + 1)
    keep = tuple(r.indices[:s_count])
    kept = set(keep)
    norms = {g: float(v @ v) for g, v in E.coeffs.items()}
    pi_err = math.sqrt(math.fsum(n for g, n in norms.items() if g not in kept))
    ordered = sorted(norms.values(), reverse=True)
    best = math.sqrt(math.fsum(ordered[s_count:]))
    brute = None
    supp = list(norms)
    if len(supp) <= brute_force_limit:
        total = math.fsum(norms.values())
        if s_count >= len(supp):
            brute = 0.0
        else:
            brute = min(
                math.sqrt(max(total - math.fsum(norms[g] for g in sub), 0.0))
                for sub in itertools.combinations(supp, s_count)
            )
    return STermReport(s_count, pi_err, best, brute, r[s_count].weight, keep)


# ---------------------------------------------------------------------------
# Lipschitz diagnostics


@dataclass(frozen=True)
class LipschitzReport:
    separations: tuple[float, ...]
    max_quotient: tuple[float, ...]
    pairs: int

    def to_dict(self) -> dict:
        return {"separations": list(self.separations), "max_quotient": list(self.max_quotient), "pairs": self.pairs}


def lipschitz_quotients(
    F: OperatorSpec, s: Spectrum, *, pairs: int = 10_000, seed: int = 0,
    separations: Sequence[float] = (1.0, 0.1, 0.01, 0.001),
) -> LipschitzReport:
    """Largest ``||F(X) - F(Z)|| / ||X - Z||`` over random pairs at shrinking distance.

    ``Z = X + h * xi`` with ``xi`` uniform on the unit sphere of the active
    coordinates.
    """
    D = F.active_dim
    if D < 1:
        raise BadParams("operator has no active coordinates")
    x = gaussian_sample(s, D, seed, pairs)
    rng = _generator((seed + 1) % 2**64)
    xi = rng.standard_normal((pairs, D))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    fx = F(x)
    out = []
    for h in separations:
        fz = F(x + h * xi)
        out.append(float(np.max(np.linalg.norm(fz - fx, axis=1)) / h))
    return LipschitzReport(tuple(float(h) for h in separations), tuple(out), pairs)
