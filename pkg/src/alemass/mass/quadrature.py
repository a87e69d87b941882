"""Product Gauss rules on the unit 3-sphere.

Hyperspherical angles (psi, theta, phi) in [0, pi] x [0, pi] x [0, 2 pi) map to

    x = (cos psi, sin psi cos theta, sin psi sin theta cos phi, sin psi sin theta sin phi)

with area element sin^2(psi) sin(theta) dpsi dtheta dphi. The rule takes Gauss-Chebyshev
(second kind) nodes in cos psi, Gauss-Legendre nodes in cos theta and 2N equispaced phi, so
the sine factors are absorbed into the weights and every polynomial of degree <= 2N - 1 in the
ambient coordinates is integrated exactly. Node counts are (N, N, 2N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_chebyu

from ..errors import DomainError

S3_AREA = 2.0 * math.pi**2
DEFAULT_N = 24
MIN_N = 3


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray  # (M, 4) unit vectors
    weights: np.ndarray  # (M,)
    order: str

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def integrate(self, values: np.ndarray) -> float:
        """Weighted sum over nodes with a fixed summation order (pairwise in numpy)."""
        v = np.asarray(values, dtype=float)
        return float(np.sum(self.weights * v))

    def self_test(self, weight_tol: float = 1e-12, poly_tol: float = 1e-10) -> dict:
        """Check the weight sum and exactness on all monomials of degree <= 4."""
        weight_err = abs(float(np.sum(self.weights)) - S3_AREA)
        worst = 0.0
        for exps in product(range(5), repeat=4):
            if sum(exps) > 4:
                continue
            vals = np.prod(self.nodes ** np.asarray(exps), axis=1)
            worst = max(worst, abs(self.integrate(vals) - monomial_sphere_integral(exps)))
        return {
            "weight_error": weight_err,
            "polynomial_error": worst,
            "passed": weight_err <= weight_tol and worst <= poly_tol,
        }


def monomial_sphere_integral(exps) -> float:
    """Exact integral of x^a over the unit S^3: zero unless all exponents are even."""
    if any(e % 2 for e in exps):
        return 0.0
    betas = [(e + 1) / 2.0 for e in exps]
    return 2.0 * math.prod(math.gamma(b) for b in betas) / math.gamma(sum(betas))


@lru_cache(maxsize=16)
def _cached_rule(n: int) -> QuadratureRule:
    # cos psi: weight sin^2 psi dpsi = sqrt(1 - v^2) dv; cos theta: weight sin theta dtheta = du
    v, wv = roots_chebyu(n)
    u, wu = leggauss(n)
    m = 2 * n
    ph = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
    wph = np.full(m, 2.0 * math.pi / m)
    V, U, F = np.meshgrid(v, u, ph, indexing="ij")
    W = wv[:, None, None] * wu[None, :, None] * wph[None, None, :]
    sp = np.sqrt(1.0 - V**2)
    st = np.sqrt(1.0 - U**2)
    nodes = np.stack([V, sp * U, sp * st * np.cos(F), sp * st * np.sin(F)], axis=-1)
    nodes = nodes.reshape(-1, 4)
    nodes.setflags(write=False)
    weights = W.reshape(-1)
    weights.setflags(write=False)
    rule = QuadratureRule(nodes=nodes, weights=weights, order=f"gcu({n})xgl({n})xeq({m})")
    report = rule.self_test()
    if not report["passed"]:
        raise DomainError(f"S^3 rule with N={n} fails its exactness self-test: {report}")
    return rule


def s3_rule(n: int = DEFAULT_N) -> QuadratureRule:
    """Product rule with (N, N, 2N) nodes; quartics need N >= 3."""
    if int(n) != n or n < MIN_N:
        raise DomainError(f"Quadrature size N must be an integer >= {MIN_N}, got {n}")
    return _cached_rule(int(n))
