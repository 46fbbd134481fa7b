"""Composite objectives F = f + psi on a metric ball, with prox/projection.

psi is always the indicator of a ball in the B-norm; the prox subproblem
    argmin_{x in ball} <c, x> + (H/2) ||x - anchor||^2
is a shifted projection (or a linear minimization when H = 0).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .metric import MetricSpace, dual_norm, norm, pairing

# relative slack when checking that a prox anchor is feasible; absorbs
# round-off from earlier projections
ANCHOR_FEAS_TOL = 1e-9


class InfeasibleAnchorError(ValueError):
    """Prox anchor lies outside the domain beyond tolerance."""


class DataShapeError(ValueError):
    """Problem data with inconsistent shapes or invalid values."""


@dataclass(frozen=True)
class BallDomain:
    """Ball {x : ||x - center|| <= radius} in the B-norm."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(
            self, "center", np.asarray(self.center, dtype=np.float64)
        )

    @property
    def diameter_D(self):
        return 2.0 * self.radius

    def contains(self, x, metric, rtol=ANCHOR_FEAS_TOL):
        return norm(metric, x - self.center) <= self.radius * (1.0 + rtol)


@dataclass
class CompositeObjective:
    """f given by a value/subgradient callable, psi the ball indicator.

    f_eval(x) -> (value, subgradient).  For finite-sum losses, n_rows and
    row_grad are set so that mini-batch oracles can sample unbiased row
    gradients: the uniform mean of row_grad(x, all_rows) equals the full
    subgradient.
    """

    f_eval: Callable[[np.ndarray], tuple]
    domain: BallDomain
    metric: MetricSpace
    label: str = ""
    n_rows: Optional[int] = None
    row_grad: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def value(self, x):
        return self.f_eval(np.asarray(x, dtype=np.float64))[0]

    def subgradient(self, x):
        return self.f_eval(np.asarray(x, dtype=np.float64))[1]


def project_ball(x, domain, metric):
    """B-metric projection onto the ball (radial scaling)."""
    x = np.asarray(x, dtype=np.float64)
    d = x - domain.center
    r = norm(metric, d)
    if r <= domain.radius:
        return x
    return domain.center + (domain.radius / r) * d


def prox_step(c, anchor, H, domain, metric):
    """argmin over the ball of <c, x> + (H/2) ||x - anchor||^2.

    For H > 0 this is the projection of anchor - B^-1 c / H; for H = 0 it
    degenerates to linear minimization over the ball (ties at c = 0 go to
    the anchor, keeping runs deterministic).
    """
    c = np.asarray(c, dtype=np.float64)
    anchor = np.asarray(anchor, dtype=np.float64)
    if H < 0:
        raise ValueError(f"H must be nonnegative, got {H}")
    if not domain.contains(anchor, metric):
        raise InfeasibleAnchorError(
            "prox anchor lies outside the domain "
            f"(||anchor - center|| = {norm(metric, anchor - domain.center)!r}, "
            f"radius = {domain.radius!r})"
        )
    if H > 0:
        return project_ball(anchor - c / (H * metric.b_diag), domain, metric)
    dn = dual_norm(metric, c)
    if dn == 0.0:
        return anchor
    return domain.center - (domain.radius / dn) * (c / metric.b_diag)


def least_squares_f(A, b, domain=None, metric=None, label="least-squares"):
    """f(x) = (1/2) ||Ax - b||_2^2 with gradient A^T (Ax - b)."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise DataShapeError(f"incompatible shapes A{A.shape}, b{b.shape}")
    m, n = A.shape

    def f_eval(x):
        r = A @ x - b
        return 0.5 * float(np.dot(r, r)), A.T @ r

    def row_grad(x, idx):
        # full gradient is the uniform mean over rows of m * r_i * a_i
        r = A[idx] @ x - b[idx]
        return m * r[:, None] * A[idx]

    return _with_defaults(f_eval, domain, metric, n, label, m, row_grad)


def logistic_f(features, labels, domain=None, metric=None, label="logistic"):
    """f(x) = sum_i log(1 + exp(-b_i <a_i, x>)) with labels in {-1, +1}."""
    A = np.asarray(features, dtype=np.float64)
    b = np.asarray(labels, dtype=np.float64)
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise DataShapeError(f"incompatible shapes A{A.shape}, b{b.shape}")
    if not np.all(np.isin(b, (-1.0, 1.0))):
        raise DataShapeError("logistic labels must be in {-1, +1}")
    m, n = A.shape

    def _sigmoid(z):
        # stable for |z| up to ~700
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out

    def f_eval(x):
        margins = b * (A @ x)
        value = float(np.sum(np.logaddexp(0.0, -margins)))
        w = -b * _sigmoid(-margins)
        return value, A.T @ w

    def row_grad(x, idx):
        margins = b[idx] * (A[idx] @ x)
        w = -b[idx] * _sigmoid(-margins)
        return m * w[:, None] * A[idx]

    return _with_defaults(f_eval, domain, metric, n, label, m, row_grad)


def p_power_f(A, b, p, domain=None, metric=None, label=None):
    """f(x) = (1/m) sum_i |<a_i, x> - b_i|^p, Hoelder-smooth with nu = p - 1.

    Subgradient is (p/m) sum_i sign(r_i) |r_i|^(p-1) a_i, with the zero
    element of the subdifferential taken at kinks (r_i = 0).
    """
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise DataShapeError(f"incompatible shapes A{A.shape}, b{b.shape}")
    m, n = A.shape

    def _row_weights(r):
        w = np.zeros_like(r)
        nz = r != 0.0
        w[nz] = p * np.sign(r[nz]) * np.abs(r[nz]) ** (p - 1.0)
        return w

    def f_eval(x):
        r = A @ x - b
        value = float(np.sum(np.abs(r) ** p)) / m
        return value, A.T @ _row_weights(r) / m

    def row_grad(x, idx):
        r = A[idx] @ x - b[idx]
        return _row_weights(r)[:, None] * A[idx]

    if label is None:
        label = f"p-power(p={p})"
    return _with_defaults(f_eval, domain, metric, n, label, m, row_grad)


def _with_defaults(f_eval, domain, metric, n, label, n_rows, row_grad):
    if metric is None:
        metric = MetricSpace.euclidean(n)
    if domain is None:
        domain = BallDomain(np.zeros(n), 1.0)
    return CompositeObjective(
        f_eval=f_eval, domain=domain, metric=metric, label=label,
        n_rows=n_rows, row_grad=row_grad,
    )


def sample_in_ball(domain, metric, rng, size=None):
    """Uniform sample from the ball in the B-norm."""
    single = size is None
    k = 1 if single else size
    dim = metric.dim
    z = rng.standard_normal((k, dim))
    z /= np.linalg.norm(z * np.sqrt(metric.b_diag), axis=1, keepdims=True)
    radii = domain.radius * rng.random(k) ** (1.0 / dim)
    pts = domain.center + radii[:, None] * z
    return pts[0] if single else pts


def estimate_holder_constant(obj, nu, n_pairs, seed):
    """Empirical lower estimate of the Hoelder constant L_nu.

    Samples n_pairs random pairs in the domain and maximizes
    ||g(x) - g(y)||_* / ||x - y||^nu.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    best = 0.0
    for _ in range(n_pairs):
        x = sample_in_ball(obj.domain, obj.metric, rng)
        y = sample_in_ball(obj.domain, obj.metric, rng)
        dist = norm(obj.metric, x - y)
        if dist == 0.0:
            continue
        gap = dual_norm(obj.metric, obj.subgradient(x) - obj.subgradient(y))
        best = max(best, gap / dist**nu)
    return best
