"""Normalized probabilists' Hermite polynomials and Gaussian quadrature.

``H_n`` is orthonormal in L2 of the standard normal measure.  Everything is
evaluated with the normalized three-term recurrence

    H_{n+1}(x) = (x H_n(x) - sqrt(n) H_{n-1}(x)) / sqrt(n + 1),

which never forms factorials.  Capped polynomials freeze ``H_n`` outside
``[-R, R]`` and are the Lipschitz surrogates used in the width lower bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.linalg import eigh_tridiagonal

from .errors import BadNodeCount, BadParams, DimensionMismatch, QuadratureTooCoarse
from .multiindex import MultiIndex

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def hermite_table(nmax: int, x) -> np.ndarray:
    """Values ``H_0(x), ..., H_nmax(x)`` stacked along a new leading axis."""
    if nmax < 0:
        raise BadParams("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for n in range(1, nmax):
        out[n + 1] = (x * out[n] - math.sqrt(n) * out[n - 1]) / math.sqrt(n + 1)
    return out


def hermite_eval(n: int, x):
    """``H_n(x)``; scalar in, float out, array in, array out."""
    if n < 0:
        raise BadParams("degree must be >= 0")
    arr = np.asarray(x, dtype=float)
    h_prev = np.ones_like(arr)
    if n == 0:
        h = h_prev
    else:
        h = arr.copy()
        for k in range(1, n):
            h, h_prev = (arr * h - math.sqrt(k) * h_prev) / math.sqrt(k + 1), h
    return float(h) if np.ndim(x) == 0 else h


def capped_hermite_eval(n: int, R: float, x):
    """``H_n(clip(x, -R, R))``."""
    if not R > 0:
        raise BadParams("cap R must be > 0")
    return hermite_eval(n, np.clip(x, -R, R) if np.ndim(x) else min(max(float(x), -R), R))


def _as_points(gamma: MultiIndex, x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1)
    if pts.shape[-1] < gamma.max_support:
        raise DimensionMismatch(
            f"multi-index {gamma} needs {gamma.max_support} coordinates, got {pts.shape[-1]}"
        )
    return pts


def _tensor(gamma: MultiIndex, pts: np.ndarray, cap: float | None):
    val = np.ones(pts.shape[:-1])
    for i, v in gamma.entries:
        xi = pts[..., i - 1]
        if cap is not None:
            xi = np.clip(xi, -cap, cap)
        val = val * hermite_eval(v, xi)
    return float(val) if val.ndim == 0 else val


def hermite_tensor_eval(gamma: MultiIndex, x):
    """Product of ``H_{gamma_i}(x_i)`` over the support of ``gamma``.

    ``x`` is one point (1-D) or a batch with coordinates on the last axis.
    """
    return _tensor(gamma, _as_points(gamma, x), None)


def _scale(pts: np.ndarray, spectrum, gamma: MultiIndex) -> np.ndarray:
    scaled = pts.copy()
    for i in gamma.support:
        scaled[..., i - 1] = pts[..., i - 1] / math.sqrt(spectrum.eigenvalue(i))
    return scaled


def hermite_scaled_eval(gamma: MultiIndex, coords, spectrum):
    """Hermite polynomial in PCA coordinates: ``prod H_{gamma_i}(x_i / sqrt(lam_i))``.

    Uses the unweighted eigenvalues ``lam_i``, not ``lam_b_i``.
    """
    pts = _as_points(gamma, coords)
    return _tensor(gamma, _scale(pts, spectrum, gamma), None)


def capped_tensor_eval(gamma: MultiIndex, R: float, x):
    if not R > 0:
        raise BadParams("cap R must be > 0")
    return _tensor(gamma, _as_points(gamma, x), R)


def capped_scaled_eval(gamma: MultiIndex, R: float, coords, spectrum):
    if not R > 0:
        raise BadParams("cap R must be > 0")
    pts = _as_points(gamma, coords)
    return _tensor(gamma, _scale(pts, spectrum, gamma), R)


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrals against the standard normal measure."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def exact_degree(self) -> int:
        return 2 * self.size - 1

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_hermite_rule(n: int) -> QuadratureRule:
    """Gauss rule with ``n`` nodes for the standard normal measure.

    Nodes come from the eigenvalues of the Jacobi matrix (zero diagonal,
    off-diagonal ``sqrt(k)``), polished by Newton steps on ``H_n``; weights
    use the Christoffel formula ``1 / sum_k H_k(x_j)**2``.
    """
    if not 1 <= n <= 200:
        raise BadNodeCount(f"node count must lie in 1..200, got {n}")
    if n == 1:
        return QuadratureRule(np.zeros(1), np.ones(1))
    off = np.sqrt(np.arange(1, n, dtype=float))
    x = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
    for _ in range(2):
        tab = hermite_table(n, x)
        # H_n' = sqrt(n) H_{n-1}
        x = x - tab[n] / (math.sqrt(n) * tab[n - 1])
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    tab = hermite_table(n - 1, x)
    w = 1.0 / np.sum(tab * tab, axis=0)
    w = 0.5 * (w + w[::-1])
    w = w / w.sum()
    return QuadratureRule(x, w)


def tensor_rule(rule: QuadratureRule, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Full tensor grid: points of shape ``(n**dim, dim)`` and weights."""
    if dim == 0:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wg = np.meshgrid(*([rule.weights] * dim), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wg], axis=-1), axis=-1)
    return pts, w


# ---------------------------------------------------------------------------
# Capped Gram matrices


@dataclass(frozen=True)
class CappedGramReport:
    indices: tuple[MultiIndex, ...]
    R: float
    gram: np.ndarray
    min_eigenvalue: float
    max_eigenvalue: float

    @property
    def epsilon_star(self) -> float:
        return max(abs(1.0 - self.min_eigenvalue), abs(self.max_eigenvalue - 1.0))

    def to_dict(self) -> dict:
        return {
            "indices": [str(g) for g in self.indices],
            "R": self.R,
            "gram": self.gram.tolist(),
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
            "epsilon_star": self.epsilon_star,
        }


def capped_gram_1d(nmax: int, R: float, nodes: int | None = None) -> np.ndarray:
    """Inner products of capped polynomials ``H~_{n,R}``, ``0 <= n, m <= nmax``.

    Each entry is the interior integral over ``[-R, R]`` (Gauss-Legendre)
    plus the two clamped tails ``0.5 H_n(+-R) H_m(+-R) erfc(R / sqrt 2)``.
    """
    if not R > 0:
        raise BadParams("cap R must be > 0")
    need = 2 * nmax + 8
    if nodes is None:
        nodes = max(need, 96)
    elif nodes < need:
        raise QuadratureTooCoarse(f"{nodes} Legendre nodes, need at least {need} for degree {nmax}")
    t, wt = leggauss(nodes)
    x = R * t
    w = R * wt * _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    tab = hermite_table(nmax, x)
    interior = (tab * w) @ tab.T
    edge = hermite_table(nmax, np.array([-R, R]))
    tail = 0.5 * math.erfc(R / math.sqrt(2.0)) * (edge @ edge.T)
    g = interior + tail
    return 0.5 * (g + g.T)


def capped_gram(indices: Sequence[MultiIndex], R: float, nodes: int | None = None) -> CappedGramReport:
    """Gram matrix of ``{H~_{gamma,R}}`` over a finite index set.

    Multi-index entries are products of one-dimensional entries over the
    union of both supports; coordinates outside it contribute exactly 1.
    """
    indices = tuple(indices)
    if not indices:
        raise BadParams("index set must be nonempty")
    nmax = max((v for g in indices for _, v in g.entries), default=0)
    g1 = capped_gram_1d(nmax, R, nodes)
    k = len(indices)
    gram = np.empty((k, k))
    for a in range(k):
        for b in range(a, k):
            ga, gb = indices[a], indices[b]
            val = 1.0
            for i in sorted(set(ga.support) | set(gb.support)):
                val *= g1[ga[i], gb[i]]
            gram[a, b] = gram[b, a] = val
    eig = np.linalg.eigvalsh(gram)
    return CappedGramReport(indices, float(R), gram, float(eig[0]), float(eig[-1]))


def _tail_moments(n: int, R: float) -> tuple[float, float]:
    """Right-tail integrals of ``h = H_n(R) - H_n`` against the Gaussian density.

    Returns ``(int h**2, int -h * H_n)`` over ``[R, inf)``.
    """
    hr = hermite_eval(n, R)
    scale = math.exp(-0.5 * R * R) * _INV_SQRT_2PI

    def sq(t):
        d = hr - hermite_eval(n, R + t)
        return math.exp(-R * t - 0.5 * t * t) * d * d

    def cross(t):
        h = hermite_eval(n, R + t)
        return math.exp(-R * t - 0.5 * t * t) * (hr - h) * h

    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)
    d2 = integrate.quad(sq, 0.0, np.inf, **opts)[0]
    c = integrate.quad(cross, 0.0, np.inf, **opts)[0]
    return scale * d2, scale * c


def capped_l2_distance_sq(gamma: MultiIndex, R: float) -> float:
    """``||H~_{gamma,R} - H_gamma||**2`` in L2 of the standard Gaussian.

    Expands the product difference over subsets of the support so that no
    two O(1) quantities are subtracted.
    """
    if not R > 0:
        raise BadParams("cap R must be > 0")
    moments = []
    for _, v in gamma.entries:
        d2, c = _tail_moments(v, R)
        # both tails agree by parity
        moments.append((2.0 * d2, 2.0 * c))
    total = 0.0
    k = len(moments)
    # sum over nonempty S, T of prod_{S&T} D * prod_{S^T} A
    for smask in range(1, 1 << k):
        for tmask in range(1, 1 << k):
            term = 1.0
            for j, (d2, c) in enumerate(moments):
                in_s, in_t = (smask >> j) & 1, (tmask >> j) & 1
                if in_s and in_t:
                    term *= d2
                elif in_s or in_t:
                    term *= c
            total += term
    return total
