"""Binary-mechanism simulator, exact oracle, and scenario metrics.

Every variable in the study mechanism is Bernoulli, so the joint law
lives on at most 256 cells.  That makes three exact tools available:
truths by direct summation, limiting fits by weighted regression on the
enumerated support, and the efficiency bound by summing the squared
influence function over cells.  Monte Carlo scenarios draw from the
same mechanism, apply a chosen misspecification set, and aggregate the
six performance metrics against the oracle truths.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed
from scipy.special import expit

from .core import Dataset, EffectSpec
from .estimate import (
    EffectEstimates,
    EstimatorOptions,
    estimate_effects,
    survey_weights,
)
from .nuisance import COMPONENT_NAMES, NuisanceDesigns, NuisanceEstimates
from .regress import DesignSpec

FAILURE_LIMIT = 0.01         # aborted when more than this share of reps fail


class ScenarioAborted(RuntimeError):
    """More than the tolerated share of replications failed."""


@dataclass(frozen=True)
class DgmParams:
    """Coefficients of the generating mechanism, log-odds scale.

    Defaults reproduce the reference mechanism exactly.  The
    study-membership model lists the inclusion indicator in its
    conditioning set but carries no term for it, so membership is
    generated from the covariates alone.
    """

    w1_p: float = 0.5
    w2_base: float = 0.4
    w2_w1: float = 0.2
    delta_int: float = -1.0
    delta_w1: float = float(np.log(4.0))
    delta_w2: float = float(np.log(4.0))
    s_w1: float = float(np.log(1.2))
    s_w2: float = float(np.log(1.2))
    s_w1w2: float = float(np.log(1.2))
    a_p: float = 0.5
    z_int: float = float(-np.log(2.0))
    z_a: float = float(np.log(4.0))
    z_w2: float = float(-np.log(2.0))
    z_s: float = float(np.log(1.4))
    z_as: float = float(np.log(1.43))
    m_int: float = float(-np.log(2.0))
    m_z: float = float(np.log(4.0))
    m_w2: float = float(-np.log(1.4))
    m_s: float = float(np.log(1.4))
    y_int: float = float(-np.log(5.0))
    y_z: float = float(np.log(8.0))
    y_m: float = float(np.log(4.0))
    y_w2: float = float(-np.log(1.2))
    y_w2z: float = float(np.log(1.2))


def _bern(level, p_one):
    return np.where(np.asarray(level) == 1, p_one, 1.0 - p_one)


class _Exact:
    """Closed-form conditionals and derived functionals of the mechanism.

    Methods are vectorized over any mix of scalar and array arguments;
    covariate w1 only enters the inclusion and membership models, so
    most derived quantities are functions of w2 alone.
    """

    def __init__(self, params: DgmParams):
        self.par = params

    def pw2(self, w1):
        return self.par.w2_base + self.par.w2_w1 * np.asarray(w1, dtype=np.float64)

    def pi(self, w1, w2):
        p = self.par
        return expit(p.delta_int + p.delta_w1 * np.asarray(w1, dtype=np.float64)
                     + p.delta_w2 * np.asarray(w2, dtype=np.float64))

    def ps1(self, w1, w2):
        p = self.par
        w1 = np.asarray(w1, dtype=np.float64)
        w2 = np.asarray(w2, dtype=np.float64)
        return expit(p.s_w1 * w1 + p.s_w2 * w2 + p.s_w1w2 * w1 * w2)

    def pz1(self, a, s, w2):
        p = self.par
        a = np.asarray(a, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)
        return expit(p.z_int + p.z_a * a + p.z_w2 * np.asarray(w2, dtype=np.float64)
                     + p.z_s * s + p.z_as * a * s)

    def pm1(self, z, s, w2):
        p = self.par
        return expit(p.m_int + p.m_z * np.asarray(z, dtype=np.float64)
                     + p.m_w2 * np.asarray(w2, dtype=np.float64)
                     + p.m_s * np.asarray(s, dtype=np.float64))

    def py1(self, m, z, w2):
        p = self.par
        z = np.asarray(z, dtype=np.float64)
        w2 = np.asarray(w2, dtype=np.float64)
        return expit(p.y_int + p.y_z * z + p.y_m * np.asarray(m, dtype=np.float64)
                     + p.y_w2 * w2 + p.y_w2z * w2 * z)

    # conditional probabilities at requested levels
    def q_prob(self, z, a, w2, s=0):
        return _bern(z, self.pz1(a, s, w2))

    def m_prob(self, m, z, w2, s=0):
        return _bern(m, self.pm1(z, s, w2))

    def m_marg(self, m, a, w2, s=0):
        return sum(self.q_prob(z, a, w2, s) * self.m_prob(m, z, w2, s)
                   for z in (0, 1))

    def g_prob(self, a):
        return _bern(a, self.par.a_p)

    def c_prob(self, a, z, m, w1, w2):
        in_source = (self.ps1(w1, w2) * self.q_prob(z, a, w2, s=1)
                     * self.m_prob(m, z, w2, s=1))
        in_target = ((1.0 - self.ps1(w1, w2)) * self.q_prob(z, a, w2, s=0)
                     * self.m_prob(m, z, w2, s=0))
        return in_source / (in_source + in_target)

    def e_prob(self, a, m, w2, s=0):
        num = self.g_prob(a) * self.m_marg(m, a, w2, s)
        den = sum(self.g_prob(av) * self.m_marg(m, av, w2, s) for av in (0, 1))
        return num / den

    def r_prob(self, z, a, m, w2, s=0):
        return (self.q_prob(z, a, w2, s) * self.m_prob(m, z, w2, s)
                / self.m_marg(m, a, w2, s))

    def h_ratio(self, a, z, m, w2, spec: EffectSpec):
        return (self.g_prob(a) / self.g_prob(spec.a_star)
                * self.q_prob(z, a, w2) / self.r_prob(z, a, m, w2)
                * self.e_prob(spec.a_star, m, w2) / self.e_prob(a, m, w2))

    def u_fn(self, z, a, w2, spec: EffectSpec):
        return sum(self.m_prob(m, z, w2) * self.py1(m, z, w2)
                   * self.h_ratio(a, z, m, w2, spec) for m in (0, 1))

    def v_fn(self, a, w2, spec: EffectSpec):
        inner = {m: sum(self.q_prob(z, spec.a_prime, w2) * self.py1(m, z, w2)
                        for z in (0, 1)) for m in (0, 1)}
        return sum(self.m_marg(m, a, w2) * inner[m] for m in (0, 1))

    # marginal structure over the four covariate combinations
    def w_table(self):
        w1 = np.array([0, 0, 1, 1])
        w2 = np.array([0, 1, 0, 1])
        p_w = _bern(w1, self.par.w1_p) * _bern(w2, self.pw2(w1))
        return w1, w2, p_w

    def t_share(self) -> float:
        """Target-population share among included rows."""
        w1, w2, p_w = self.w_table()
        included = p_w * self.pi(w1, w2)
        return float(np.sum(included * (1.0 - self.ps1(w1, w2))) / np.sum(included))

    def gamma_limit(self, w1, w2):
        """Limiting normalized weight: undoes the inclusion sampling."""
        w1g, w2g, p_w = self.w_table()
        p_included = float(np.sum(p_w * self.pi(w1g, w2g)))
        p_target = float(np.sum(p_w * (1.0 - self.ps1(w1g, w2g))))
        return self.t_share() * p_included / (self.pi(w1, w2) * p_target)

    def theta(self, spec: EffectSpec, weighted: bool = True) -> float:
        w1, w2, p_w = self.w_table()
        wt = p_w * (1.0 - self.ps1(w1, w2))
        if not weighted:
            # unweighted runs target the included frame's covariate law
            wt = wt * self.pi(w1, w2)
        wt = wt / wt.sum()
        return float(np.sum(wt * self.v_fn(spec.a_star, w2, spec)))


@dataclass(frozen=True)
class OracleTruths:
    """Exact parameter values and efficiency bounds per effect."""

    theta_pp: float
    theta_ps: float
    theta_ss: float
    sde_true: float
    sie_true: float
    sigma2_sde: float
    sigma2_sie: float


def _cell_arrays(params: DgmParams) -> dict[str, np.ndarray]:
    ex = _Exact(params)
    grids = np.meshgrid(*([np.array([0, 1])] * 8), indexing="ij")
    w1, w2, d, s, a, z, m, y = (g.ravel().astype(np.int64) for g in grids)
    prob = (_bern(w1, params.w1_p) * _bern(w2, ex.pw2(w1))
            * _bern(d, ex.pi(w1, w2)) * _bern(s, ex.ps1(w1, w2))
            * _bern(a, params.a_p) * _bern(z, ex.pz1(a, s, w2))
            * _bern(m, ex.pm1(z, s, w2)) * _bern(y, ex.py1(m, z, w2)))
    return {"w1": w1, "w2": w2, "d": d, "s": s, "a": a, "z": z, "m": m,
            "y": y, "prob": prob}


def _cell_d(ex: _Exact, cells: dict, spec: EffectSpec, theta: float) -> np.ndarray:
    ap, ast = spec.a_prime, spec.a_star
    w1, w2 = cells["w1"], cells["w2"]
    s, a, z, m, y = cells["s"], cells["a"], cells["z"], cells["m"], cells["y"]
    t = ex.t_share()
    g_ap = ex.g_prob(ap)
    g_as = ex.g_prob(ast)
    c_v = ex.c_prob(ap, z, m, w1, w2)
    h_v = ex.h_ratio(ap, z, m, w2, spec)
    b_obs = ex.py1(m, z, w2)
    q1 = ex.q_prob(1, ap, w2)
    u_gap = ex.u_fn(1, ap, w2, spec) - ex.u_fn(0, ap, w2, spec)
    v_st = ex.v_fn(ast, w2, spec)
    b_marg = sum(ex.q_prob(zz, ap, w2) * ex.py1(m, zz, w2) for zz in (0, 1))
    in_y = (s == 1) & (a == ap)
    in_z = (s == 0) & (a == ap)
    in_m = (s == 0) & (a == ast)
    in_w = s == 0
    d_y = in_y / (t * g_ap) * (1.0 - c_v) / c_v * h_v * (y - b_obs)
    d_z = in_z / (t * g_ap) * u_gap * (z - q1)
    d_m = in_m / (t * g_as) * (b_marg - v_st)
    d_w = in_w / t * (v_st - theta)
    return d_y + d_z + d_m + d_w


def _contrast_bound(ex: _Exact, cells: dict, left: EffectSpec, right: EffectSpec,
                    thetas: dict, weighted: bool) -> float:
    d_eff = (_cell_d(ex, cells, left, thetas[left])
             - _cell_d(ex, cells, right, thetas[right]))
    if weighted:
        d_eff = d_eff * ex.gamma_limit(cells["w1"], cells["w2"])
    included = cells["d"] == 1
    p_delta = float(cells["prob"][included].sum())
    p_cond = cells["prob"][included] / p_delta
    val = d_eff[included]
    mean = float(np.sum(p_cond * val))
    var = float(np.sum(p_cond * val * val)) - mean * mean
    # scaled per nominal draw, so sqrt(n)-standardized spread approaches 1
    return var / p_delta


def oracle(params: DgmParams = DgmParams(), weighted: bool = True) -> OracleTruths:
    """Exact truths and efficiency bounds by enumeration.

    All quantities come from direct summation over the 256 joint cells;
    nothing is Monte Carlo.  Weighted truths describe the population the
    inclusion sampling was applied to; unweighted truths describe the
    included frame itself.
    """
    ex = _Exact(params)
    pp = EffectSpec(a_prime=1, a_star=1)
    ps = EffectSpec(a_prime=1, a_star=0)
    ss = EffectSpec(a_prime=0, a_star=0)
    thetas = {c: ex.theta(c, weighted) for c in (pp, ps, ss)}
    cells = _cell_arrays(params)
    return OracleTruths(
        theta_pp=thetas[pp], theta_ps=thetas[ps], theta_ss=thetas[ss],
        sde_true=thetas[ps] - thetas[ss],
        sie_true=thetas[pp] - thetas[ps],
        sigma2_sde=_contrast_bound(ex, cells, ps, ss, thetas, weighted),
        sigma2_sie=_contrast_bound(ex, cells, pp, ps, thetas, weighted),
    )


def exact_nuisances(params: DgmParams, spec: EffectSpec,
                    designs: NuisanceDesigns | None = None) -> NuisanceEstimates:
    """Oracle nuisance suite built from the closed-form conditionals."""
    ex = _Exact(params)

    def rows(x, d: Dataset) -> np.ndarray:
        return np.broadcast_to(np.asarray(x, dtype=np.float64), (d.n,))

    def c_fn(d, a=None, z=None):
        av = d.a if a is None else a
        zv = d.z if z is None else z
        return rows(ex.c_prob(av, zv, d.m[:, 0], d.w[:, 0], d.w[:, 1]), d)

    def g_fn(d, a):
        return rows(ex.g_prob(a), d)

    def e_fn(d, a):
        return rows(ex.e_prob(a, d.m[:, 0], d.w[:, 1]), d)

    def q_fn(d, z, a):
        return rows(ex.q_prob(z, a, d.w[:, 1]), d)

    def r_fn(d, z, a):
        return rows(ex.r_prob(z, a, d.m[:, 0], d.w[:, 1]), d)

    def b_fn(d, a=None, z=None):
        zv = d.z if z is None else z
        return rows(ex.py1(d.m[:, 0], zv, d.w[:, 1]), d)

    def u_fn(d, z, a):
        return rows(ex.u_fn(z, a, d.w[:, 1], spec), d)

    def v_fn(d, a):
        return rows(ex.v_fn(a, d.w[:, 1], spec), d)

    return NuisanceEstimates(c=c_fn, g=g_fn, e=e_fn, q=q_fn, r=r_fn, b=b_fn,
                             u=u_fn, v=v_fn, t=ex.t_share(),
                             designs=designs, models={})


def cell_table(params: DgmParams = DgmParams(),
               weighted: bool = True) -> tuple[Dataset, np.ndarray]:
    """Enumerated analyzed-sample support as weighted pseudo-data.

    One row per joint cell of the included sample, outcome cells split
    only in the source population, with weights scaled so that weighted
    means over the pseudo-rows reproduce population expectations through
    the ordinary estimation code paths.
    """
    ex = _Exact(params)
    cells = _cell_arrays(params)
    p_no_y = cells["prob"] / _bern(cells["y"], ex.py1(cells["m"], cells["z"],
                                                      cells["w2"]))
    included = cells["d"] == 1
    keep_split = included & (cells["s"] == 1)
    keep_merged = included & (cells["s"] == 0) & (cells["y"] == 0)
    keep = keep_split | keep_merged
    prob = np.where(cells["s"] == 1, cells["prob"], p_no_y)[keep]
    w1, w2 = cells["w1"][keep], cells["w2"][keep]
    s = cells["s"][keep]
    y = cells["y"][keep].astype(np.float64)
    y[s == 0] = np.nan
    p_delta = float(cells["prob"][included].sum())
    gamma = prob / p_delta * keep.sum()
    if weighted:
        gamma = gamma * ex.gamma_limit(w1, w2)
    data = Dataset(delta=np.ones(keep.sum(), dtype=np.int64), s=s,
                   a=cells["a"][keep], z=cells["z"][keep],
                   w=np.column_stack([w1, w2]).astype(np.float64),
                   m=cells["m"][keep].reshape(-1, 1).astype(np.float64),
                   y=y, pi=ex.pi(w1, w2), outcome_bounds=(0.0, 1.0))
    return data, gamma


def generate(params: DgmParams, n: int, seed: int, rep: int = 0) -> Dataset:
    """Draw an analyzed sample of nominal size n.

    The stream is counter-based and keyed by (seed, rep), so replicate
    draws are identical however replications are scheduled.  Rows
    failing the inclusion draw are dropped, outcomes in the target
    population are blanked, and the true inclusion probability is
    attached per row.
    """
    ex = _Exact(params)
    rng = np.random.Generator(np.random.Philox(key=[seed, rep]))
    u = rng.random((8, n))
    w1 = (u[0] < params.w1_p).astype(np.int64)
    w2 = (u[1] < ex.pw2(w1)).astype(np.int64)
    pi = ex.pi(w1, w2)
    delta = (u[2] < pi).astype(np.int64)
    s = (u[3] < ex.ps1(w1, w2)).astype(np.int64)
    a = (u[4] < params.a_p).astype(np.int64)
    z = (u[5] < ex.pz1(a, s, w2)).astype(np.int64)
    m = (u[6] < ex.pm1(z, s, w2)).astype(np.int64)
    y = (u[7] < ex.py1(m, z, w2)).astype(np.float64)
    y[s == 0] = np.nan
    keep = delta == 1
    return Dataset(delta=delta[keep], s=s[keep], a=a[keep], z=z[keep],
                   w=np.column_stack([w1, w2]).astype(np.float64)[keep],
                   m=m[keep].reshape(-1, 1).astype(np.float64),
                   y=y[keep], pi=pi[keep], outcome_bounds=(0.0, 1.0))


def dgm_designs() -> NuisanceDesigns:
    """Regression designs matched to the generating mechanism.

    The outcome, intermediate and coarsened regressions contain the true
    models exactly; the membership, treatment-given-mediator and
    conditional-intermediate regressions include all pairwise products
    their conditionals need, leaving only three-way terms out.
    """
    return NuisanceDesigns(
        c=DesignSpec(terms=("a", "z", "m1", "w1", "w2"),
                     interactions=(("w1", "w2"), ("a", "z"), ("z", "m1"),
                                   ("z", "w2"), ("m1", "w2"))),
        g=DesignSpec(terms=("s", "w1", "w2")),
        e=DesignSpec(terms=("s", "m1", "w1", "w2"),
                     interactions=(("s", "m1"), ("s", "w2"), ("m1", "w2"))),
        q=DesignSpec(terms=("s", "a", "w1", "w2"), interactions=(("a", "s"),)),
        r=DesignSpec(terms=("s", "a", "m1", "w1", "w2"),
                     interactions=(("a", "s"), ("m1", "s"), ("m1", "w2"),
                                   ("s", "w2"))),
        b=DesignSpec(terms=("a", "z", "m1", "w1", "w2"),
                     interactions=(("z", "w2"),)),
        u=DesignSpec(terms=("s", "a", "z", "w1", "w2"),
                     interactions=(("a", "z"), ("a", "s"), ("z", "s"),
                                   ("z", "w2"), ("a", "w2"), ("s", "w2"))),
        v=DesignSpec(terms=("a", "w1", "w2"),
                     interactions=(("a", "w1"), ("a", "w2"), ("w1", "w2"))),
    )


MIS_GRID: tuple[frozenset[str], ...] = (
    frozenset(),
    frozenset({"c"}),
    frozenset({"g"}),
    frozenset({"e"}),
    frozenset({"q"}),
    frozenset({"r"}),
    frozenset({"b"}),
    frozenset({"u"}),
    frozenset({"v"}),
    frozenset({"c", "e", "r", "u", "v"}),
    frozenset({"c", "g", "e", "r", "u"}),
)


def mis_label(mis: frozenset[str]) -> str:
    if not mis:
        return "none"
    return ",".join(name for name in COMPONENT_NAMES if name in mis)


def parse_mis(label: str) -> frozenset[str]:
    label = label.strip()
    if label.lower() in ("", "none"):
        return frozenset()
    parts = tuple(part.strip() for part in label.split(","))
    unknown = [part for part in parts if part not in COMPONENT_NAMES]
    if unknown:
        raise ValueError(f"unknown nuisance components: {', '.join(unknown)}")
    return frozenset(parts)


def scenario_designs(mis: frozenset[str]) -> NuisanceDesigns:
    """Mechanism designs with the chosen components collapsed to constants."""
    base = dgm_designs()
    collapsed = {name: getattr(base, name).intercept() for name in mis}
    return replace(base, **collapsed)


@dataclass(frozen=True)
class ScenarioSpec:
    """One Monte Carlo scenario: mechanism, analyst choices, and metric target."""

    n: int
    reps: int
    mis: frozenset[str] = frozenset()
    estimator: str = "tmle"
    effect: str = "sde"
    folds: int = 1
    seed: int = 0
    weighted: bool = True
    fluct_weighted: bool = True
    g_empirical: bool = False
    params: DgmParams = DgmParams()

    def __post_init__(self) -> None:
        if self.n < 100:
            raise ValueError("n must be at least 100")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.estimator not in ("one_step", "tmle"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.effect not in ("sde", "sie"):
            raise ValueError(f"unknown effect {self.effect!r}")
        if self.folds < 1:
            raise ValueError("folds must be at least 1")
        unknown = set(self.mis) - set(COMPONENT_NAMES)
        if unknown:
            raise ValueError(f"unknown nuisance components: {sorted(unknown)}")
        object.__setattr__(self, "mis", frozenset(self.mis))


@dataclass(frozen=True)
class MetricsRow:
    """Aggregated performance of one scenario against the oracle truth.

    The three ratio metrics need a Monte Carlo spread, so they are absent
    when only one replication survives.
    """

    abs_bias: float
    sqrt_n_abs_bias: float
    relse: float | None
    relsd: float | None
    relrmse: float | None
    coverage: float
    failures: int = 0


@dataclass(frozen=True)
class ReplicationFailed:
    """Record of one failed replication, kept for reporting."""

    rep: int
    error: str


def replicate(spec: ScenarioSpec, rep: int) -> EffectEstimates:
    """Run one replication of a scenario and return all effect estimates."""
    data = generate(spec.params, spec.n, spec.seed, rep)
    gamma = survey_weights(data) if spec.weighted else None
    opts = EstimatorOptions(estimator=spec.estimator,
                            tmle_weighted_fluctuation=spec.fluct_weighted,
                            folds=spec.folds, seed=spec.seed,
                            g_empirical=spec.g_empirical)
    return estimate_effects(data, scenario_designs(spec.mis), (1, 0), opts, gamma)


def _safe_replicate(spec: ScenarioSpec, rep: int):
    try:
        return replicate(spec, rep)
    except (RuntimeError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return ReplicationFailed(rep=rep, error=f"{type(exc).__name__}: {exc}")


def _effective_threads(threads: int | None) -> int:
    if threads is not None:
        if threads < 1:
            raise ValueError("threads must be at least 1")
        return threads
    return os.cpu_count() or 1


# replication results are shared between the two effect rows of a scenario
_REP_CACHE: dict[ScenarioSpec, list] = {}


def run_scenario(spec: ScenarioSpec, threads: int | None = None) -> MetricsRow:
    """Monte Carlo metrics for one scenario row.

    Replications are scheduled across workers but keyed by replicate
    index, so the metrics are bit-identical for any thread count.
    Failed replications are excluded and counted; more than 1% of them
    aborts the scenario.
    """
    family = replace(spec, effect="sde")
    results = _REP_CACHE.get(family)
    if results is None:
        jobs = _effective_threads(threads)
        if jobs == 1:
            results = [_safe_replicate(family, i) for i in range(spec.reps)]
        else:
            results = Parallel(n_jobs=jobs)(
                delayed(_safe_replicate)(family, i) for i in range(spec.reps))
        _REP_CACHE[family] = results
    failures = [r for r in results if isinstance(r, ReplicationFailed)]
    if len(failures) > FAILURE_LIMIT * spec.reps:
        raise ScenarioAborted(
            f"{len(failures)} of {spec.reps} replications failed; "
            f"first: {failures[0].error}")
    kept = [r for r in results if not isinstance(r, ReplicationFailed)]
    estimates = [getattr(eff, spec.effect) for eff in kept]

    truths = oracle(spec.params, weighted=spec.weighted)
    truth = truths.sde_true if spec.effect == "sde" else truths.sie_true
    sigma2 = truths.sigma2_sde if spec.effect == "sde" else truths.sigma2_sie
    thetas = np.array([e.theta for e in estimates])
    ses = np.array([e.se for e in estimates])
    covered = np.array([e.ci[0] <= truth <= e.ci[1] for e in estimates])
    bias = float(thetas.mean()) - truth
    nominal = float(spec.n)
    if len(estimates) > 1:
        sd = float(thetas.std(ddof=1))
        relse = float(ses.mean()) / sd
        relsd = float(np.sqrt(nominal)) * sd / float(np.sqrt(sigma2))
        relrmse = nominal * (bias * bias + sd * sd) / sigma2
    else:
        relse = relsd = relrmse = None
    return MetricsRow(abs_bias=abs(bias),
                      sqrt_n_abs_bias=float(np.sqrt(nominal)) * abs(bias),
                      relse=relse, relsd=relsd, relrmse=relrmse,
                      coverage=float(covered.mean()),
                      failures=len(failures))
