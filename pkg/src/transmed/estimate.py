"""One-step and targeted estimators, cross-fitting, contrasts, inference.

Both estimators consume a fitted nuisance suite and solve the weighted
influence-function equation: the one-step by adding the empirical mean
of the influence function to the substitution value, the targeted
estimator by fluctuating the outcome and intermediate regressions until
the score terms vanish, then fluctuating the coarsened regression so the
remaining terms are solved exactly.  Cross-fitting replaces each row's
nuisance evaluations by fits from the complement of its fold.  Effect
contrasts and Wald intervals sit on top.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit, logit

from .core import (
    Dataset,
    DimensionMismatch,
    EffectSpec,
    EmptyArm,
    MissingOutcome,
    MissingPi,
    OutcomeScale,
    scale_outcome,
)
from .eif import clamp_hits, eif_inputs, eif_terms
from .nuisance import (
    NuisanceDesigns,
    NuisanceEstimates,
    compute_h,
    fit_suite,
    fit_u,
    fit_v,
)
from .regress import P_CLAMP, fit_binary

CI_Z = 1.96                  # 95% Wald intervals
_FOLD_STREAM = 0x666F6C64    # RNG stream salt reserved for fold assignment


class EstimatorError(RuntimeError):
    """Estimation failed in a way the caller can act on."""


class FoldTooSmall(EstimatorError):
    """A cross-fitting fold or its complement lacks a population arm."""


class TargetingDiverged(EstimatorError):
    """Score criterion unmet after the targeting iteration cap.

    Not raised during estimation: the last iterate is returned with
    ``diagnostics["targeting_diverged"]`` set so Monte Carlo loops keep
    running.  Callers wanting a hard failure can inspect the flag and
    raise this themselves.
    """


@dataclass(frozen=True)
class Estimate:
    """Point estimate with Wald inference.

    ``scale`` keeps the unit-interval value the estimator produced;
    ``theta``, ``se`` and ``ci`` are on the original outcome scale once
    a caller maps them back through the outcome bounds.
    """

    theta: float
    se: float
    ci: tuple[float, float]
    scale: float
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EffectEstimates:
    """The three corner parameters and their two contrasts."""

    theta_pp: Estimate
    theta_ps: Estimate
    theta_ss: Estimate
    sde: Estimate
    sie: Estimate


@dataclass(frozen=True)
class EstimatorOptions:
    """Choices shared by the estimation entry points."""

    estimator: str = "tmle"
    tmle_weighted_fluctuation: bool = True
    max_targeting_iters: int = 20
    folds: int = 1
    seed: int = 0
    g_empirical: bool = False

    def __post_init__(self) -> None:
        if self.estimator not in ("one_step", "tmle"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.folds < 1:
            raise ValueError("folds must be at least 1")
        if self.max_targeting_iters < 1:
            raise ValueError("max_targeting_iters must be at least 1")


def survey_weights(data: Dataset) -> np.ndarray:
    """Normalized inverse-probability-of-sampling weights.

    Each weight is 1/pi rescaled so the weights average to one over the
    target population, which pins the weighted estimand to the sampled
    frame without changing its target-population mean.
    """
    if np.isnan(data.pi).any():
        raise MissingPi("sampling probabilities are absent on some rows")
    if np.any(data.pi <= 0.0) or np.any(data.pi > 1.0):
        raise ValueError("sampling probabilities must lie in (0, 1]")
    target = data.s == 0
    if not target.any():
        raise EmptyArm("no target-population rows to normalize against")
    inv = 1.0 / data.pi
    return inv * (float(np.sum(target)) / float(np.sum(inv[target])))


def _as_gamma(gamma: np.ndarray | None, n: int) -> np.ndarray:
    if gamma is None:
        return np.ones(n)
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.shape != (n,):
        raise DimensionMismatch(f"weights have shape {gamma.shape}, expected ({n},)")
    if not np.all(np.isfinite(gamma)) or np.any(gamma < 0.0):
        raise ValueError("weights must be finite and nonnegative")
    return gamma


def _lvl(level, n: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(level, dtype=np.float64), (n,))


def _check_outcomes(data: Dataset) -> None:
    if np.any((data.s == 1) & np.isnan(data.y)):
        raise MissingOutcome("source-population rows with absent outcomes")


def _one_step_core(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
                   gamma: np.ndarray | None) -> tuple[Estimate, np.ndarray]:
    _check_outcomes(data)
    n = data.n
    gam = _as_gamma(gamma, n)
    inputs = eif_inputs(data, eta, spec)
    # evaluating at theta = 0 turns the covariate term into the plug-in,
    # so the weighted mean of the total is the one-step estimate itself
    start = eif_terms(data, inputs, spec, 0.0)
    theta = float(np.mean(gam * start.total))
    parts = eif_terms(data, inputs, spec, theta)
    values = gam * parts.total
    variance = float(values.var(ddof=1)) if n > 1 else 0.0
    se = float(np.sqrt(variance / n))
    diag = {
        "tmle_iterations": 0,
        "final_score": abs(float(values.mean())),
        "clamp_hits": clamp_hits(inputs),
        "targeting_diverged": False,
    }
    est = Estimate(theta=theta, se=se, ci=(theta - CI_Z * se, theta + CI_Z * se),
                   scale=theta, diagnostics=diag)
    return est, values


def one_step(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
             gamma: np.ndarray | None = None) -> Estimate:
    """Influence-function-corrected substitution estimate.

    Adds the weighted empirical mean of the influence function to the
    plug-in, which solves the weighted estimating equation exactly when
    the suite's population share was computed under the same weights.
    """
    return _one_step_core(data, eta, spec, gamma)[0]


def _tmle_core(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
               gamma: np.ndarray | None,
               opts: EstimatorOptions) -> tuple[Estimate, np.ndarray]:
    _check_outcomes(data)
    n = data.n
    gam = _as_gamma(gamma, n)
    designs = eta.designs
    if designs is None:
        raise EstimatorError("nuisance suite carries no designs; targeting "
                             "needs them to refresh the sequential regressions")
    ap, ast = spec.a_prime, spec.a_star
    t = eta.t
    weighted = opts.tmle_weighted_fluctuation

    g_prime = eta.g(data, ap)
    g_star = eta.g(data, ast)
    e_prime = eta.e(data, ap)
    e_star = eta.e(data, ast)
    c_az = {(av, zv): eta.c(data, a=av, z=zv) for av in (0, 1) for zv in (0, 1)}
    r_one = {av: eta.r(data, 1, av) for av in (0, 1)}

    # mutable targeting state: logits of the outcome regression on each
    # (treatment, intermediate) branch, and of the fluctuated arm of the
    # intermediate regression; the other arm stays at its initial fit
    lb = {(av, zv): logit(eta.b(data, a=av, z=zv)) for av in (0, 1) for zv in (0, 1)}
    lq = {"prime": logit(eta.q(data, 1, ap))}
    q_other = eta.q(data, 1, 1 - ap)

    def bound(d: Dataset) -> None:
        if d is not data:
            raise EstimatorError("targeted nuisances are bound to their analysis dataset")

    def b_state(d: Dataset, a=None, z=None) -> np.ndarray:
        bound(d)
        av = data.a if a is None else _lvl(a, n)
        zv = data.z if z is None else _lvl(z, n)
        return np.where(av == 1,
                        np.where(zv == 1, expit(lb[(1, 1)]), expit(lb[(1, 0)])),
                        np.where(zv == 1, expit(lb[(0, 1)]), expit(lb[(0, 0)])))

    def q_state(d: Dataset, z, a) -> np.ndarray:
        bound(d)
        av = _lvl(a, n)
        zv = _lvl(z, n)
        p_one = np.where(av == ap, expit(lq["prime"]), q_other)
        return np.where(zv == 1, p_one, 1.0 - p_one)

    eta_cur = replace(eta, b=b_state, q=q_state)

    def refresh_u() -> None:
        nonlocal eta_cur
        eta_cur = fit_u(data, eta_cur, spec, designs, mis=eta.misspecified,
                        fit_weights=gam)

    def score_yz() -> float:
        parts = eif_terms(data, eif_inputs(data, eta_cur, spec), spec, 0.0)
        return float(np.mean(gam * (parts.d_y + parts.d_z)))

    prime_src = (data.a == ap) & (data.s == 1)
    prime_tgt = (data.a == ap) & (data.s == 0)
    star_tgt = (data.a == ast) & (data.s == 0)
    fluct_issues = 0

    def ratio_cq(av: int, zv) -> np.ndarray:
        # [(1-c)/c] * q~ / r at treatment av, intermediate zv (scalar or per-row)
        c_here = np.where(_lvl(zv, n) == 1, c_az[(av, 1)], c_az[(av, 0)])
        q_here = q_state(data, zv, av)
        r_here = np.where(_lvl(zv, n) == 1, r_one[av], 1.0 - r_one[av])
        return (1.0 - c_here) / c_here * q_here / r_here

    def fluctuate_b() -> None:
        nonlocal fluct_issues
        if not prime_src.any():
            return
        offset = np.where(data.z == 1, lb[(ap, 1)], lb[(ap, 0)])
        if weighted:
            cov = ratio_cq(ap, data.z)
            wts = gam * (e_star / e_prime) / (g_star * t)
        else:
            c_obs = np.where(data.z == 1, c_az[(ap, 1)], c_az[(ap, 0)])
            cov = ((1.0 - c_obs) / c_obs
                   * compute_h(eta_cur, spec, data, a=ap) / (g_prime * t))
            wts = gam
        model = fit_binary(None, cov[prime_src][:, None], data.y[prime_src],
                           weights=wts[prime_src], offset=offset[prime_src])
        if not model.converged:
            fluct_issues += 1
        eps = float(model.coefficients[0])
        for av in (0, 1):
            g_here = g_prime if av == ap else eta.g(data, av)
            for zv in (0, 1):
                if weighted:
                    direction = ratio_cq(av, zv)
                else:
                    c_b = c_az[(av, zv)]
                    direction = ((1.0 - c_b) / c_b
                                 * compute_h(eta_cur, spec, data, a=av, z=zv)
                                 / (g_here * t))
                lb[(av, zv)] = lb[(av, zv)] + eps * direction

    def fluctuate_q() -> None:
        nonlocal fluct_issues
        if not prime_tgt.any():
            return
        gap = eta_cur.u(data, 1, ap) - eta_cur.u(data, 0, ap)
        if weighted:
            cov = gap
            wts = gam / (g_prime * t)
        else:
            cov = gap / (g_prime * t)
            wts = gam
        model = fit_binary(None, cov[prime_tgt][:, None],
                           data.z[prime_tgt].astype(np.float64),
                           weights=wts[prime_tgt],
                           offset=lq["prime"][prime_tgt])
        if not model.converged:
            fluct_issues += 1
        lq["prime"] = lq["prime"] + float(model.coefficients[0]) * cov

    denom = float(np.sqrt(n) * np.log(n))
    tau = 1.0 / denom if denom > 0 else np.inf
    score = score_yz()
    iters = 0
    while abs(score) > tau and iters < opts.max_targeting_iters:
        iters += 1
        fluctuate_b()
        refresh_u()
        fluctuate_q()
        refresh_u()
        score = score_yz()
    diverged = abs(score) > tau

    # coarsened-regression stage: refit v on the targeted pseudo-outcome,
    # then fluctuate it so the remaining score terms are solved exactly
    eta_cur = fit_v(data, eta_cur, spec, designs, mis=eta.misspecified,
                    fit_weights=gam)
    v_refit = eta_cur.v
    cov_v = np.ones(n) if weighted else 1.0 / (g_star * t)
    wts_v = gam / (g_star * t) if weighted else gam
    q_one = expit(lq["prime"])
    big_q = (b_state(data, a=ap, z=1) * q_one
             + b_state(data, a=ap, z=0) * (1.0 - q_one))
    eps_v = 0.0
    if star_tgt.any():
        offset_v = logit(np.clip(v_refit(data, ast), P_CLAMP, 1.0 - P_CLAMP))
        model = fit_binary(None, cov_v[star_tgt][:, None], big_q[star_tgt],
                           weights=wts_v[star_tgt], offset=offset_v[star_tgt])
        if not model.converged:
            fluct_issues += 1
        eps_v = float(model.coefficients[0])

    def v_state(d: Dataset, a) -> np.ndarray:
        bound(d)
        base = v_refit(d, a)
        fluct = expit(logit(np.clip(base, P_CLAMP, 1.0 - P_CLAMP)) + eps_v * cov_v)
        return np.where(_lvl(a, n) == ast, fluct, base)

    eta_cur = replace(eta_cur, v=v_state)

    target_wt = gam * (data.s == 0)
    total_wt = float(np.sum(target_wt))
    if total_wt <= 0.0:
        raise EstimatorError("no weighted target-population rows")
    theta = float(np.sum(target_wt * v_state(data, ast)) / total_wt)

    inputs = eif_inputs(data, eta_cur, spec)
    parts = eif_terms(data, inputs, spec, theta)
    values = gam * parts.total
    variance = float(values.var(ddof=1)) if n > 1 else 0.0
    se = float(np.sqrt(variance / n))
    diag = {
        "tmle_iterations": iters,
        "final_score": abs(float(np.mean(gam * (parts.d_y + parts.d_z)))),
        "score_mw": abs(float(np.mean(gam * (parts.d_m + parts.d_w)))),
        "clamp_hits": clamp_hits(inputs),
        "targeting_diverged": diverged,
        "fluct_nonconverged": fluct_issues,
    }
    est = Estimate(theta=theta, se=se, ci=(theta - CI_Z * se, theta + CI_Z * se),
                   scale=theta, diagnostics=diag)
    return est, values


def tmle(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
         gamma: np.ndarray | None = None,
         opts: EstimatorOptions | None = None) -> Estimate:
    """Targeted substitution estimate on the unit outcome scale.

    Iterates the outcome and intermediate fluctuations, refreshing the
    inner sequential regression from the current iterates, until the
    joint score drops below 1/(sqrt(n) log n) or the iteration cap hits;
    a final coarsened-regression fluctuation makes the remaining terms
    exactly zero, so the plug-in mean inherits the estimating equation.
    """
    if opts is None:
        opts = EstimatorOptions(estimator="tmle")
    return _tmle_core(data, eta, spec, gamma, opts)[0]


def _run_corner(data: Dataset, eta: NuisanceEstimates, spec: EffectSpec,
                gam: np.ndarray, opts: EstimatorOptions) -> tuple[Estimate, np.ndarray]:
    if opts.estimator == "tmle":
        return _tmle_core(data, eta, spec, gam, opts)
    return _one_step_core(data, eta, spec, gam)


def _rescale(est: Estimate, bounds: OutcomeScale, contrast: bool) -> Estimate:
    width = bounds.width
    shift = 0.0 if contrast else bounds.y_min
    lo, hi = est.ci
    return Estimate(theta=shift + width * est.theta, se=width * est.se,
                    ci=(shift + width * lo, shift + width * hi),
                    scale=est.scale, diagnostics=est.diagnostics)


def _merge_diag(left: dict, right: dict) -> dict:
    out: dict = {}
    for key in sorted(set(left) | set(right)):
        a, b = left.get(key), right.get(key)
        if a is None or b is None:
            out[key] = a if b is None else b
        elif isinstance(a, bool):
            out[key] = a or b
        else:
            out[key] = max(a, b)
    return out


def _contrast(left: Estimate, right: Estimate, val_left: np.ndarray,
              val_right: np.ndarray, bounds: OutcomeScale) -> Estimate:
    diff = val_left - val_right
    n = diff.shape[0]
    theta = left.scale - right.scale
    variance = float(diff.var(ddof=1)) if n > 1 else 0.0
    se = float(np.sqrt(variance / n))
    est = Estimate(theta=theta, se=se, ci=(theta - CI_Z * se, theta + CI_Z * se),
                   scale=theta,
                   diagnostics=_merge_diag(left.diagnostics, right.diagnostics))
    return _rescale(est, bounds, contrast=True)


def _fold_assignments(n: int, folds: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=[seed, _FOLD_STREAM]))
    order = rng.permutation(n)
    assign = np.empty(n, dtype=np.int64)
    for j, chunk in enumerate(np.array_split(order, folds)):
        assign[chunk] = j
    return assign


_GRID_AZ = tuple((av, zv) for av in (0, 1) for zv in (0, 1))


def _stacked_etas(data: Dataset, designs: NuisanceDesigns,
                  corners: list[EffectSpec], opts: EstimatorOptions,
                  gam: np.ndarray,
                  fold_ids: np.ndarray | None = None) -> dict[EffectSpec, NuisanceEstimates]:
    """Fold-wise nuisance fits stacked into per-row prediction tables.

    Every row's predictions come from the suite fitted on the complement
    of its fold; the population share stays a full-sample quantity so
    the estimating-equation identities survive cross-fitting.  The
    returned suites are bound to `data` and reject any other dataset.
    """
    n = data.n
    if fold_ids is None:
        assign = _fold_assignments(n, opts.folds, opts.seed)
        folds = opts.folds
    else:
        assign = np.asarray(fold_ids, dtype=np.int64)
        if assign.shape != (n,):
            raise DimensionMismatch("fold labels must align with rows")
        folds = int(assign.max()) + 1

    def blank_az() -> dict:
        return {key: np.empty(n) for key in _GRID_AZ}

    def blank_a() -> dict:
        return {0: np.empty(n), 1: np.empty(n)}

    grids = {corner: {"c": blank_az(), "b": blank_az(), "u": blank_az(),
                      "g": blank_a(), "e": blank_a(), "q": blank_a(),
                      "r": blank_a(), "v": blank_a()} for corner in corners}
    mis_seen: frozenset[str] = frozenset()

    for j in range(folds):
        fold = assign == j
        comp = ~fold
        if not fold.any():
            raise FoldTooSmall(f"fold {j} is empty")
        for label, mask in (("fold", fold), ("complement of fold", comp)):
            s_rows = data.s[mask]
            if not ((s_rows == 0).any() and (s_rows == 1).any()):
                raise FoldTooSmall(f"{label} {j} lacks a population arm")
        comp_data = data.subset(comp)
        comp_gam = gam[comp]
        base = fit_suite(comp_data, corners[0], designs, fit_weights=comp_gam,
                         g_empirical=opts.g_empirical)
        mis_seen = base.misspecified
        fold_data = data.subset(fold)
        for corner in corners:
            if corner == corners[0]:
                eta_c = base
            else:
                eta_c = fit_v(comp_data,
                              fit_u(comp_data, base, corner, designs,
                                    fit_weights=comp_gam),
                              corner, designs, fit_weights=comp_gam)
            grid = grids[corner]
            for av, zv in _GRID_AZ:
                grid["c"][(av, zv)][fold] = eta_c.c(fold_data, a=av, z=zv)
                grid["b"][(av, zv)][fold] = eta_c.b(fold_data, a=av, z=zv)
                grid["u"][(av, zv)][fold] = eta_c.u(fold_data, zv, av)
            for av in (0, 1):
                grid["g"][av][fold] = eta_c.g(fold_data, av)
                grid["e"][av][fold] = eta_c.e(fold_data, av)
                grid["q"][av][fold] = eta_c.q(fold_data, 1, av)
                grid["r"][av][fold] = eta_c.r(fold_data, 1, av)
                grid["v"][av][fold] = eta_c.v(fold_data, av)

    t_full = float(np.mean(gam * (data.s == 0)))

    def make_eta(grid: dict) -> NuisanceEstimates:
        def bound(d: Dataset) -> None:
            if d is not data:
                raise EstimatorError("cross-fitted nuisances are bound to "
                                     "their analysis dataset")

        def from_az(table: dict, av, zv) -> np.ndarray:
            return np.where(av == 1,
                            np.where(zv == 1, table[(1, 1)], table[(1, 0)]),
                            np.where(zv == 1, table[(0, 1)], table[(0, 0)]))

        def pick_a(table: dict, av) -> np.ndarray:
            return np.where(av == 1, table[1], table[0])

        def c_fn(d, a=None, z=None):
            bound(d)
            av = data.a if a is None else _lvl(a, n)
            zv = data.z if z is None else _lvl(z, n)
            return from_az(grid["c"], av, zv)

        def b_fn(d, a=None, z=None):
            bound(d)
            av = data.a if a is None else _lvl(a, n)
            zv = data.z if z is None else _lvl(z, n)
            return from_az(grid["b"], av, zv)

        def g_fn(d, a):
            bound(d)
            return pick_a(grid["g"], _lvl(a, n))

        def e_fn(d, a):
            bound(d)
            return pick_a(grid["e"], _lvl(a, n))

        def q_fn(d, z, a):
            bound(d)
            p_one = pick_a(grid["q"], _lvl(a, n))
            return np.where(_lvl(z, n) == 1, p_one, 1.0 - p_one)

        def r_fn(d, z, a):
            bound(d)
            p_one = pick_a(grid["r"], _lvl(a, n))
            return np.where(_lvl(z, n) == 1, p_one, 1.0 - p_one)

        def u_fn(d, z, a):
            bound(d)
            return from_az(grid["u"], _lvl(a, n), _lvl(z, n))

        def v_fn(d, a):
            bound(d)
            return pick_a(grid["v"], _lvl(a, n))

        return NuisanceEstimates(c=c_fn, g=g_fn, e=e_fn, q=q_fn, r=r_fn,
                                 b=b_fn, u=u_fn, v=v_fn, t=t_full,
                                 misspecified=mis_seen, weights_used=gam,
                                 designs=designs, models={})

    return {corner: make_eta(grids[corner]) for corner in corners}


def cross_fit(data: Dataset, designs: NuisanceDesigns, spec: EffectSpec,
              opts: EstimatorOptions, gamma: np.ndarray | None = None,
              *, fold_ids: np.ndarray | None = None) -> Estimate:
    """Run the chosen estimator with fold-wise nuisance fits.

    The fold partition is a seeded permutation split into ``opts.folds``
    near-equal blocks; ``fold_ids`` overrides it with explicit labels.
    """
    if fold_ids is None and opts.folds < 2:
        raise EstimatorError("cross-fitting requires at least two folds")
    data_unit, bounds = scale_outcome(data)
    gam = _as_gamma(gamma, data.n)
    etas = _stacked_etas(data_unit, designs, [spec], opts, gam, fold_ids=fold_ids)
    est, _ = _run_corner(data_unit, etas[spec], spec, gam, opts)
    return _rescale(est, bounds, contrast=False)


def estimate_effects(data: Dataset, designs: NuisanceDesigns,
                     spec_pair: tuple[int, int], opts: EstimatorOptions,
                     gamma: np.ndarray | None = None) -> EffectEstimates:
    """Corner parameters and effect contrasts for one treatment pair.

    Fits the nuisance suite once and reuses it across the three corners,
    refitting only the sequential regressions whose evaluation points
    change; contrast standard errors come from the per-row difference of
    the corners' influence-function values.
    """
    ap, ast = spec_pair
    data_unit, bounds = scale_outcome(data)
    n = data_unit.n
    gam = _as_gamma(gamma, n)
    corner_ps = EffectSpec(a_prime=ap, a_star=ast)
    corner_pp = EffectSpec(a_prime=ap, a_star=ap)
    corner_ss = EffectSpec(a_prime=ast, a_star=ast)
    corners: list[EffectSpec] = []
    for corner in (corner_ps, corner_pp, corner_ss):
        if corner not in corners:
            corners.append(corner)

    if opts.folds > 1:
        etas = _stacked_etas(data_unit, designs, corners, opts, gam)
    else:
        base = fit_suite(data_unit, corners[0], designs, fit_weights=gam,
                         g_empirical=opts.g_empirical)
        etas = {corners[0]: base}
        for corner in corners[1:]:
            etas[corner] = fit_v(data_unit,
                                 fit_u(data_unit, base, corner, designs,
                                       fit_weights=gam),
                                 corner, designs, fit_weights=gam)

    results = {corner: _run_corner(data_unit, etas[corner], corner, gam, opts)
               for corner in corners}
    est_ps, val_ps = results[corner_ps]
    est_pp, val_pp = results[corner_pp]
    est_ss, val_ss = results[corner_ss]
    return EffectEstimates(
        theta_pp=_rescale(est_pp, bounds, contrast=False),
        theta_ps=_rescale(est_ps, bounds, contrast=False),
        theta_ss=_rescale(est_ss, bounds, contrast=False),
        sde=_contrast(est_ps, est_ss, val_ps, val_ss, bounds),
        sie=_contrast(est_pp, est_ps, val_pp, val_ps, bounds),
    )
