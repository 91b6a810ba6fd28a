"""Worst-case expected revenue over a KL ball, via the concave 1-D dual.

The dual value is maximized by derivative-free golden-section search; the
independent primal oracle bisects the tilt parameter of the exponential
family of candidate worst cases until the KL constraint is active.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import RadiusInfeasibleError
from .model import (
    ChoiceDistribution,
    MnlModel,
    as_assortment,
    choice_probabilities,
    nominal_expected_revenue,
)
from .radius import ZERO_RADIUS, RadiusSpec

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
#: Lower end of the dual search bracket, relative to r_max.
_LAMBDA_FLOOR = 1e-12


def kl_divergence(q, p) -> float:
    """KL(q || p) with the conventions 0*log(0/.) = 0 and q>0,p=0 -> inf."""
    total = 0.0
    for qi, pi in zip(q, p):
        if qi <= 0.0:
            continue
        if pi <= 0.0:
            return math.inf
        total += qi * math.log(qi / pi)
    return total


def _log_mgf(probs, revs, lam: float) -> float:
    """log E[exp(-r/lambda)]; safe for small lam because r_0 = 0 keeps mass."""
    acc = 0.0
    for p, r in zip(probs, revs):
        if p > 0.0:
            acc += p * math.exp(-r / lam)
    return math.log(acc)


def dual_objective(model: MnlModel, items, lam: float, rho_val: float) -> float:
    """Dual criterion -lam*log E_{P(.|S)}[exp(-r/lam)] - lam*rho_val at lam > 0."""
    if not lam > 0.0:
        raise ValueError("lam must be positive")
    dist = choice_probabilities(model, items)
    revs = [0.0] + [float(model.revenues[i - 1]) for i in items]
    return -lam * _log_mgf(dist.probs, revs, lam) - lam * rho_val


def _golden_max(f, lo: float, hi: float, rel_tol: float = 1e-10, max_iter: int = 200):
    """Maximize a concave f on [lo, hi]; returns (argmax, max)."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= rel_tol * max(abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    best_val, best_x = max(candidates, key=lambda t: t[0])
    return best_x, best_val


@dataclass(frozen=True)
class DualEvaluation:
    """Robust expected revenue with its dual optimizer and a primal certificate."""

    value: float
    lambda_star: float
    radius: float
    worst_case: ChoiceDistribution

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "lambda_star": None if math.isinf(self.lambda_star) else self.lambda_star,
            "radius": None if math.isinf(self.radius) else self.radius,
            "worst_case": self.worst_case.to_dict(),
        }


def _tilted(probs, revs, beta: float):
    """Exponentially tilted distribution q_beta(i) ~ P(i) * exp(-beta*r_i)."""
    w = [p * math.exp(-beta * r) if p > 0.0 else 0.0 for p, r in zip(probs, revs)]
    z = math.fsum(w)
    return [x / z for x in w]


def _tilt_to_kl(probs, revs, rho_val: float, tol: float = 1e-13, max_iter: int = 200):
    """Tilt until KL(q_beta || P) = rho_val; returns (q, revenue of q).

    Falls back to the infinite-tilt limit (all mass on zero-revenue choices)
    when the ball is large enough to contain it.
    """
    nominal = math.fsum(p * r for p, r in zip(probs, revs))
    if rho_val <= 0.0:
        return list(probs), nominal
    zero_mass = math.fsum(p for p, r in zip(probs, revs) if r == 0.0)
    if rho_val >= -math.log(zero_mass) - 1e-15:
        q = [p / zero_mass if r == 0.0 else 0.0 for p, r in zip(probs, revs)]
        return q, 0.0

    def kl_at(beta: float) -> float:
        return kl_divergence(_tilted(probs, revs, beta), probs)

    hi = 1.0
    for _ in range(400):
        if kl_at(hi) > rho_val:
            break
        hi *= 2.0
    lo = 0.0
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if kl_at(mid) < rho_val:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    q = _tilted(probs, revs, beta)
    return q, math.fsum(qi * r for qi, r in zip(q, revs))


def primal_robust_revenue_oracle(model: MnlModel, items, rho_val: float) -> float:
    """Minimum expected revenue over the KL ball, solved on the primal side.

    Candidate minimizers are exponential tilts of the conditional choice
    distribution; the KL divergence of the tilt is continuous and
    nondecreasing in the tilt parameter, so bisection makes the constraint
    active (or the infinite-tilt limit applies when the ball contains it).
    """
    items = as_assortment(items, model.n_items)
    if rho_val < 0.0:
        raise ValueError("rho_val must be nonnegative")
    dist = choice_probabilities(model, items)
    revs = [0.0] + [float(model.revenues[i - 1]) for i in items]
    _, value = _tilt_to_kl(list(dist.probs), revs, rho_val)
    return value


def robust_revenue(
    model: MnlModel,
    items,
    spec: RadiusSpec,
    tol: float = 1e-9,
    allow_degenerate: bool = False,
) -> DualEvaluation:
    """Robust expected revenue of ``items`` under the given radius rule.

    Solves the dual sup over lambda in [0, r_max/radius] by golden-section
    search and attaches a worst-case certificate inside the ball.  A radius
    below ``ZERO_RADIUS`` degenerates to the nominal expected revenue.
    """
    items = as_assortment(items, model.n_items)
    try:
        rho_val = spec.radius(model, items)
    except RadiusInfeasibleError:
        if not allow_degenerate:
            raise
        dist = choice_probabilities(model, items)
        worst = _point_mass_on_zero_revenue(dist, model, items)
        return DualEvaluation(value=0.0, lambda_star=0.0, radius=math.inf, worst_case=worst)

    dist = choice_probabilities(model, items)
    revs = [0.0] + [float(model.revenues[i - 1]) for i in items]
    probs = list(dist.probs)

    if rho_val < ZERO_RADIUS:
        value = nominal_expected_revenue(model, items)
        return DualEvaluation(
            value=value, lambda_star=math.inf, radius=rho_val, worst_case=dist
        )

    cap = model.r_max / rho_val
    lam_lo = _LAMBDA_FLOOR * model.r_max

    def objective(lam: float) -> float:
        return -lam * _log_mgf(probs, revs, lam) - lam * rho_val

    lam_star, value = _golden_max(objective, lam_lo, cap)
    if value < 0.0:
        # sup over [0, B] includes the lam -> 0 limit, which is exactly 0
        value, lam_star = 0.0, 0.0

    worst = _certificate(dist, probs, revs, lam_star, rho_val, value, tol)
    return DualEvaluation(value=value, lambda_star=lam_star, radius=rho_val, worst_case=worst)


def _point_mass_on_zero_revenue(dist, model, items):
    revs = [0.0] + [float(model.revenues[i - 1]) for i in items]
    zero_mass = math.fsum(p for p, r in zip(dist.probs, revs) if r == 0.0)
    q = [p / zero_mass if r == 0.0 else 0.0 for p, r in zip(dist.probs, revs)]
    return ChoiceDistribution(support=dist.support, probs=np.array(q))


def _certificate(dist, probs, revs, lam_star, rho_val, value, tol):
    """Worst-case distribution attaining the dual value within the ball.

    The tilt at the optimal dual variable is exact when the optimum is
    interior; at the bracket boundary the KL constraint can be inactive in
    the tilting family, in which case bisecting the tilt directly is used.
    """
    q = None
    if lam_star > 0.0 and math.isfinite(lam_star):
        cand = _tilted(probs, revs, 1.0 / lam_star)
        kl = kl_divergence(cand, probs)
        rev = math.fsum(c * r for c, r in zip(cand, revs))
        if kl <= rho_val + 1e-8 and rev <= value + tol:
            q = cand
    if q is None:
        q, _ = _tilt_to_kl(probs, revs, rho_val)
    return ChoiceDistribution(support=dist.support, probs=np.array(q))


def robust_revenue_varying_primal_check(
    model: MnlModel,
    items,
    rho0: float,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte-Carlo one-sided check of the varying-radius robust revenue.

    Samples priors within KL distance ``rho0`` of the prior induced by the
    model (Dirichlet proposals, rejection on the KL constraint) and returns
    the smallest conditional expected revenue seen.  The dual value can never
    exceed this minimum by more than solver tolerance.
    """
    items = as_assortment(items, model.n_items)
    if rho0 < ZERO_RADIUS:
        return nominal_expected_revenue(model, items)
    n_plus = model.n_items + 1
    p0 = np.concatenate(([1.0], model.attractions)) / (1.0 + model.v_tot)
    member = np.zeros(n_plus, dtype=bool)
    member[0] = True
    for i in items:
        member[i] = True
    revs = np.concatenate(([0.0], model.revenues))

    def conditional_revenue(prior: np.ndarray) -> float:
        mass = float(prior[member].sum())
        return float((prior[member] * revs[member]).sum() / mass)

    best = conditional_revenue(p0)
    accepted = 0
    budget = 10 ** 5
    c_lo = max(2.0, 0.25 * n_plus / rho0)
    c_hi = 100.0 * c_lo
    while accepted < samples and budget > 0:
        batch = min(512, budget)
        budget -= batch
        for _ in range(batch):
            conc = math.exp(rng.uniform(math.log(c_lo), math.log(c_hi)))
            prior = rng.dirichlet(conc * p0 * n_plus)
            if np.any(prior <= 0.0):
                continue
            kl = float(np.sum(prior * np.log(prior / p0)))
            if kl > rho0:
                continue
            accepted += 1
            rev = conditional_revenue(prior)
            if rev < best:
                best = rev
            if accepted >= samples:
                break
    return best
