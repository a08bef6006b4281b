"""Efficient influence function for the transported effect corner theta(a', a*).

The function splits into four orthogonal pieces tied to the factors of
the observed-data likelihood: an outcome residual term active on
source-population rows at treatment a', an intermediate-variable
residual term and a mediator term active on target-population rows, and
a covariate term centering the substitution estimate.  Survey weights
multiply the total per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, EffectSpec, MissingOutcome, Observation
from .nuisance import H_MAX, NuisanceEstimates, compute_h
from .regress import P_CLAMP


@dataclass(frozen=True)
class EifComponents:
    """The four influence-function terms and their sum.

    Fields are per-row arrays when built from a sample, scalars when
    built from a single observation.  Each term is exactly zero wherever
    its population/treatment indicator is zero.
    """

    d_y: np.ndarray | float
    d_z: np.ndarray | float
    d_m: np.ndarray | float
    d_w: np.ndarray | float
    total: np.ndarray | float


@dataclass(frozen=True)
class EifInputs:
    """Per-row nuisance evaluations the influence function consumes.

    All treatment-indexed quantities are evaluated at the corner's a'
    except ``g_star`` and ``v_star`` which sit at a*.  ``b_obs`` is the
    outcome regression at (a', observed z); ``b_z1``/``b_z0`` fix the
    intermediate value.
    """

    t: float
    g_prime: np.ndarray
    g_star: np.ndarray
    c_prime: np.ndarray
    h_prime: np.ndarray
    b_obs: np.ndarray
    b_z1: np.ndarray
    b_z0: np.ndarray
    q_one: np.ndarray
    u_one: np.ndarray
    u_zero: np.ndarray
    v_star: np.ndarray


def eif_inputs(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec) -> EifInputs:
    """Evaluate every nuisance array the influence function needs."""
    ap, ast = spec.a_prime, spec.a_star
    return EifInputs(
        t=eta.t,
        g_prime=eta.g(data, ap),
        g_star=eta.g(data, ast),
        c_prime=eta.c(data, a=ap),
        h_prime=np.asarray(compute_h(eta, spec, data, a=ap)),
        b_obs=eta.b(data, a=ap),
        b_z1=eta.b(data, a=ap, z=1),
        b_z0=eta.b(data, a=ap, z=0),
        q_one=eta.q(data, 1, ap),
        u_one=eta.u(data, 1, ap),
        u_zero=eta.u(data, 0, ap),
        v_star=eta.v(data, ast),
    )


def eif_terms(data: Dataset, inputs: EifInputs, spec: EffectSpec,
              theta: float) -> EifComponents:
    """Influence-function terms from precomputed nuisance arrays.

    The outcome term is forced to zero off its indicator before the
    residual multiplies in, so absent outcomes in the target population
    never contaminate the total.
    """
    s = data.s
    a = data.a
    z = data.z
    in_source_prime = (s == 1) & (a == spec.a_prime)
    in_target_prime = (s == 0) & (a == spec.a_prime)
    in_target_star = (s == 0) & (a == spec.a_star)
    in_target = s == 0

    y_resid = np.where(in_source_prime, data.y - inputs.b_obs, 0.0)
    odds_flip = (1.0 - inputs.c_prime) / inputs.c_prime
    d_y = (in_source_prime / (inputs.t * inputs.g_prime)
           * odds_flip * inputs.h_prime * y_resid)

    z_resid = np.where(in_target_prime, z - inputs.q_one, 0.0)
    d_z = (in_target_prime / (inputs.t * inputs.g_prime)
           * (inputs.u_one - inputs.u_zero) * z_resid)

    b_marg = inputs.b_z1 * inputs.q_one + inputs.b_z0 * (1.0 - inputs.q_one)
    d_m = (in_target_star / (inputs.t * inputs.g_star)
           * np.where(in_target_star, b_marg - inputs.v_star, 0.0))

    d_w = in_target / inputs.t * np.where(in_target, inputs.v_star - theta, 0.0)

    return EifComponents(d_y=d_y, d_z=d_z, d_m=d_m, d_w=d_w,
                         total=d_y + d_z + d_m + d_w)


def eif_row(obs: Observation, eta: NuisanceEstimates, spec: EffectSpec,
            theta: float) -> EifComponents:
    """Influence-function terms for one observation.

    Raises
    ------
    MissingOutcome
        The observation is from the source population but carries no
        outcome, so its residual term cannot be formed.
    """
    if obs.s == 1 and obs.y is None:
        raise MissingOutcome("source-population observation has no outcome")
    one_row = Dataset(
        delta=np.array([obs.delta]), s=np.array([obs.s]),
        a=np.array([obs.a]), z=np.array([obs.z]),
        w=np.asarray([obs.w], dtype=np.float64),
        m=np.asarray([obs.m], dtype=np.float64),
        y=np.array([np.nan if obs.y is None else obs.y]),
        pi=np.array([np.nan if obs.pi is None else obs.pi]),
    )
    parts = eif_terms(one_row, eif_inputs(one_row, eta, spec), spec, theta)
    return EifComponents(
        d_y=float(parts.d_y[0]), d_z=float(parts.d_z[0]),
        d_m=float(parts.d_m[0]), d_w=float(parts.d_w[0]),
        total=float(parts.total[0]),
    )


@dataclass(frozen=True)
class EifSample:
    """Weighted influence-function evaluation over a sample."""

    components: EifComponents
    values: np.ndarray              # gamma * total per row
    mean: float
    variance: float                 # sample variance of the values


def eif_sample(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
               theta: float, gamma: np.ndarray | None = None) -> EifSample:
    """Per-row weighted totals plus their mean and sample variance.

    variance / n is the squared standard error of the corresponding
    estimator.  With gamma absent or all ones this is the unweighted
    influence function.
    """
    if np.any((data.s == 1) & np.isnan(data.y)):
        raise MissingOutcome("source-population rows with absent outcomes")
    if gamma is None:
        gamma = np.ones(data.n)
    parts = eif_terms(data, eif_inputs(data, eta, spec), spec, theta)
    values = gamma * parts.total
    mean = float(values.mean())
    variance = float(values.var(ddof=1)) if data.n > 1 else 0.0
    return EifSample(components=parts, values=values, mean=mean, variance=variance)


def clamp_hits(inputs: EifInputs) -> int:
    """Rows where any probability or ratio sits at its clamp bound."""

    def at_bound(p: np.ndarray) -> np.ndarray:
        return (p <= P_CLAMP) | (p >= 1.0 - P_CLAMP)

    hit = (at_bound(inputs.c_prime) | at_bound(inputs.g_prime)
           | at_bound(inputs.g_star) | at_bound(inputs.q_one)
           | (inputs.h_prime >= H_MAX))
    return int(np.sum(hit))
