"""Fitting and evaluation of the nuisance suite eta = (c, g, e, q, r, b, u, v, t).

The components, with all conditioning implicit on the analyzed rows:

- c(a, z, m, w): probability the row is from the source population given
  treatment, intermediate, mediators and covariates.
- g(a | w): treatment probability in the target population.
- e(a | m, w): treatment probability given mediators, target population.
- q(z | a, w): intermediate-variable probability, target population.
- r(z | a, m, w): as q but also given mediators.
- b(a, z, m, w): outcome regression, learned in the source population.
- t: marginal probability of the target population.
- u(z, a, w) and v(a, w): sequential regressions that stand in for the
  mediator densities, so no density is ever estimated.

Every fit is a pooled regression including the population indicator
where the component's definition calls for it, with predictions taken
at fixed indicator values.  Components listed in a misspecification set
are collapsed to intercept-only fits.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.special import logit

from .core import Dataset, EffectSpec
from .regress import (
    DesignSpec,
    FittedModel,
    P_CLAMP,
    RegressionError,
    design_matrix,
    fit_binary,
    fit_linear,
    predict,
)

H_MAX = 50.0             # cap on the mediator-shift weight ratio
COMPONENT_NAMES = ("c", "g", "e", "q", "r", "b", "u", "v")


@dataclass(frozen=True)
class NuisanceDesigns:
    """Per-component model designs plus the link for the u/v regressions.

    ``u_link`` and ``v_link`` default to ``"identity"`` because the u
    pseudo-outcome b*h is unbounded above; ``"logit"`` is accepted for
    responses verified to stay in [0, 1].
    """

    c: DesignSpec
    g: DesignSpec
    e: DesignSpec
    q: DesignSpec
    r: DesignSpec
    b: DesignSpec
    u: DesignSpec
    v: DesignSpec
    u_link: str = "identity"
    v_link: str = "identity"


def default_designs(n_w: int, n_m: int) -> NuisanceDesigns:
    """Main-effects designs for a dataset with n_w covariates, n_m mediators."""
    w = tuple(f"w{i}" for i in range(1, n_w + 1))
    m = tuple(f"m{i}" for i in range(1, n_m + 1))
    return NuisanceDesigns(
        c=DesignSpec(terms=("a", "z") + m + w),
        g=DesignSpec(terms=("s",) + w),
        e=DesignSpec(terms=("s",) + m + w),
        q=DesignSpec(terms=("s", "a") + w),
        r=DesignSpec(terms=("s", "a") + m + w),
        b=DesignSpec(terms=("a", "z") + m + w),
        u=DesignSpec(terms=("s", "a", "z") + w),
        v=DesignSpec(terms=("a",) + w),
    )


PredictorAZ = Callable[..., np.ndarray]


@dataclass(frozen=True)
class NuisanceEstimates:
    """Fitted suite exposed as vectorized prediction functions.

    Each function takes the dataset whose rows to predict for, plus the
    treatment / intermediate level it is evaluated at; levels may be
    scalars or per-row arrays.  Probability components return values in
    [P_CLAMP, 1 - P_CLAMP]; u and v follow their fit link.
    """

    c: PredictorAZ                  # c(data, a=None, z=None)
    g: PredictorAZ                  # g(data, a)
    e: PredictorAZ                  # e(data, a)
    q: PredictorAZ                  # q(data, z, a)
    r: PredictorAZ                  # r(data, z, a)
    b: PredictorAZ                  # b(data, a=None, z=None)
    u: PredictorAZ | None           # u(data, z, a)
    v: PredictorAZ | None           # v(data, a)
    t: float
    misspecified: frozenset[str] = frozenset()
    weights_used: np.ndarray | None = None
    designs: NuisanceDesigns | None = None
    models: dict[str, FittedModel] = field(default_factory=dict)


def _level_values(level, n: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(level, dtype=np.float64), (n,))


def _pick_level(p_one: np.ndarray, level, n: int) -> np.ndarray:
    lev = _level_values(level, n)
    return np.where(lev == 1.0, p_one, 1.0 - p_one)


def _component_design(designs: NuisanceDesigns, name: str,
                      mis: frozenset[str]) -> DesignSpec:
    design: DesignSpec = getattr(designs, name)
    return design.intercept() if name in mis else design


def _named_fit(name: str, fit, *args, **kwargs):
    try:
        return fit(*args, **kwargs)
    except RegressionError as exc:
        raise type(exc)(f"{name}: {exc}") from exc


def fit_suite(data: Dataset, spec: EffectSpec, designs: NuisanceDesigns,
              mis: frozenset[str] = frozenset(),
              fit_weights: np.ndarray | None = None,
              g_empirical: bool = False) -> NuisanceEstimates:
    """Fit the full nuisance suite on an analyzed sample.

    Parameters
    ----------
    data : Dataset
        Validated rows, all with delta = 1.
    spec : EffectSpec
        Corner (a', a*) the u and v regressions are built for.
    designs : NuisanceDesigns
    mis : frozenset of component names
        Components to replace by intercept-only fits.
    fit_weights : optional per-row weights (survey weights or all ones)
    g_empirical : bool
        Estimate g as the weighted empirical arm share in the target
        population instead of a regression (randomized-treatment
        shortcut).

    Returns
    -------
    NuisanceEstimates
    """
    unknown = mis - set(COMPONENT_NAMES)
    if unknown:
        raise ValueError(f"unknown misspecification names {sorted(unknown)}")
    gamma = np.ones(data.n) if fit_weights is None else np.asarray(fit_weights, dtype=np.float64)
    if gamma.shape != (data.n,):
        raise ValueError("fit weights are not aligned with rows")

    t_hat = float(np.mean(gamma * (data.s == 0)))
    if not 0.0 < t_hat < 1.0:
        raise ValueError(f"target-population share {t_hat} outside (0, 1)")

    models: dict[str, FittedModel] = {}

    c_design = _component_design(designs, "c", mis)
    models["c"] = _named_fit("c", fit_binary, c_design,
                             design_matrix(c_design, data),
                             (data.s == 1).astype(np.float64), gamma)

    if g_empirical:
        target = data.s == 0
        share = float(np.sum(gamma[target] * data.a[target]) / np.sum(gamma[target]))
        share = min(max(share, P_CLAMP), 1.0 - P_CLAMP)
        g_design = DesignSpec(intercept_only=True)
        models["g"] = FittedModel(coefficients=np.array([logit(share)]),
                                  link="logit", design=g_design,
                                  converged=True, iterations=0)
    else:
        g_design = _component_design(designs, "g", mis)
        models["g"] = _named_fit("g", fit_binary, g_design,
                                 design_matrix(g_design, data),
                                 data.a.astype(np.float64), gamma)

    e_design = _component_design(designs, "e", mis)
    models["e"] = _named_fit("e", fit_binary, e_design,
                             design_matrix(e_design, data),
                             data.a.astype(np.float64), gamma)

    q_design = _component_design(designs, "q", mis)
    models["q"] = _named_fit("q", fit_binary, q_design,
                             design_matrix(q_design, data),
                             data.z.astype(np.float64), gamma)

    r_design = _component_design(designs, "r", mis)
    models["r"] = _named_fit("r", fit_binary, r_design,
                             design_matrix(r_design, data),
                             data.z.astype(np.float64), gamma)

    b_design = _component_design(designs, "b", mis)
    source = data.s == 1
    source_rows = data.subset(source)
    models["b"] = _named_fit("b", fit_binary, b_design,
                             design_matrix(b_design, source_rows),
                             source_rows.y, gamma[source])

    def c_fn(d: Dataset, a=None, z=None) -> np.ndarray:
        return predict(models["c"], design_matrix(c_design, d, a=a, z=z))

    def g_fn(d: Dataset, a) -> np.ndarray:
        p_one = predict(models["g"], design_matrix(g_design, d, s=0))
        return _pick_level(p_one, a, d.n)

    def e_fn(d: Dataset, a) -> np.ndarray:
        p_one = predict(models["e"], design_matrix(e_design, d, s=0))
        return _pick_level(p_one, a, d.n)

    def q_fn(d: Dataset, z, a) -> np.ndarray:
        p_one = predict(models["q"], design_matrix(q_design, d, s=0, a=a))
        return _pick_level(p_one, z, d.n)

    def r_fn(d: Dataset, z, a) -> np.ndarray:
        p_one = predict(models["r"], design_matrix(r_design, d, s=0, a=a))
        return _pick_level(p_one, z, d.n)

    def b_fn(d: Dataset, a=None, z=None) -> np.ndarray:
        return predict(models["b"], design_matrix(b_design, d, a=a, z=z))

    eta = NuisanceEstimates(
        c=c_fn, g=g_fn, e=e_fn, q=q_fn, r=r_fn, b=b_fn,
        u=None, v=None, t=t_hat,
        misspecified=frozenset(mis), weights_used=gamma,
        designs=designs, models=models,
    )
    eta = fit_u(data, eta, spec, designs, mis, gamma)
    eta = fit_v(data, eta, spec, designs, mis, gamma)
    return eta


def compute_h(eta: NuisanceEstimates, spec: EffectSpec, at, *,
              a=None, z=None):
    """Mediator-shift weight ratio h(a, z, m, w), clamped to [0, H_MAX].

    h = [g(a|w) / g(a*|w)] * [q(z|a,w) / r(z|a,m,w)] * [e(a*|m,w) / e(a|m,w)],
    which equals the ratio of the transported to the observed mediator
    density without either density being estimated.

    Parameters
    ----------
    eta : NuisanceEstimates
    spec : EffectSpec
    at : Dataset, or a single (a, z, m, w) tuple
    a, z : optional level overrides when `at` is a Dataset; default to
        the observed columns.

    Returns
    -------
    Per-row array for a Dataset, float for a tuple.
    """
    if isinstance(at, tuple):
        a_val, z_val, m_val, w_val = at
        one_row = Dataset(
            delta=np.array([1]), s=np.array([0]),
            a=np.array([int(a_val)]), z=np.array([int(z_val)]),
            w=np.asarray([w_val], dtype=np.float64),
            m=np.asarray([m_val], dtype=np.float64),
            y=np.array([np.nan]), pi=np.array([np.nan]),
        )
        return float(compute_h(eta, spec, one_row)[0])
    data: Dataset = at
    a_at = data.a if a is None else a
    z_at = data.z if z is None else z
    ratio = (eta.g(data, a_at) / eta.g(data, spec.a_star)
             * eta.q(data, z_at, a_at) / eta.r(data, z_at, a_at)
             * eta.e(data, spec.a_star) / eta.e(data, a_at))
    return np.clip(ratio, 0.0, H_MAX)


def _fit_by_link(name: str, link: str, design: DesignSpec, X: np.ndarray,
                 response: np.ndarray, weights: np.ndarray) -> FittedModel:
    if link == "identity":
        return _named_fit(name, fit_linear, design, X, response, weights)
    if link == "logit":
        if response.min() < 0 or response.max() > 1:
            raise ValueError(
                f"{name}: logit link requires responses in [0, 1], "
                f"got range ({response.min():.3g}, {response.max():.3g})")
        return _named_fit(name, fit_binary, design, X, response, weights)
    raise ValueError(f"unknown link {link!r}")


def fit_u(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
          designs: NuisanceDesigns, mis: frozenset[str] = frozenset(),
          fit_weights: np.ndarray | None = None,
          pseudo: np.ndarray | None = None) -> NuisanceEstimates:
    """Fit the inner sequential regression u(z, a, w).

    Regresses the pseudo-outcome b*h, evaluated at each row's observed
    treatment and intermediate value, on the population indicator,
    treatment, intermediate and covariates; predictions are taken in the
    target population.  `pseudo` overrides the pseudo-outcome (used when
    targeting updates b and h).
    """
    gamma = eta.weights_used if fit_weights is None else np.asarray(fit_weights, dtype=np.float64)
    if gamma is None:
        gamma = np.ones(data.n)
    if pseudo is None:
        pseudo = eta.b(data) * compute_h(eta, spec, data)
    u_design = _component_design(designs, "u", mis)
    model = _fit_by_link("u", designs.u_link, u_design,
                         design_matrix(u_design, data), pseudo, gamma)

    def u_fn(d: Dataset, z, a) -> np.ndarray:
        return predict(model, design_matrix(u_design, d, s=0, a=a, z=z))

    return replace(eta, u=u_fn, models={**eta.models, "u": model})


def fit_v(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
          designs: NuisanceDesigns, mis: frozenset[str] = frozenset(),
          fit_weights: np.ndarray | None = None,
          pseudo: np.ndarray | None = None) -> NuisanceEstimates:
    """Fit the outer sequential regression v(a, w).

    Marginalizes the intermediate variable out of b at treatment a' via
    q(.|a', w), then regresses the result on treatment and covariates
    among target-population rows; predictions are taken at any requested
    treatment level (a* in the estimators).
    """
    gamma = eta.weights_used if fit_weights is None else np.asarray(fit_weights, dtype=np.float64)
    if gamma is None:
        gamma = np.ones(data.n)
    if pseudo is None:
        q_one = eta.q(data, 1, spec.a_prime)
        pseudo = (eta.b(data, a=spec.a_prime, z=1) * q_one
                  + eta.b(data, a=spec.a_prime, z=0) * (1.0 - q_one))
    target = data.s == 0
    target_rows = data.subset(target)
    v_design = _component_design(designs, "v", mis)
    model = _fit_by_link("v", designs.v_link, v_design,
                         design_matrix(v_design, target_rows),
                         pseudo[target], gamma[target])

    def v_fn(d: Dataset, a) -> np.ndarray:
        return predict(model, design_matrix(v_design, d, a=a))

    return replace(eta, v=v_fn, models={**eta.models, "v": model})
