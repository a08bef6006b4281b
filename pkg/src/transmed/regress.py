"""Weighted regression engine behind every nuisance fit and fluctuation.

Two links are supported: logistic fits solved by iteratively reweighted
least squares (with offset and quasi-binomial responses in [0, 1], as
the fluctuation steps require), and weighted least squares for unbounded
pseudo-outcomes.  Misspecification is injected by collapsing a design to
its intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit

from .core import Dataset, DimensionMismatch

TOL_IRLS = 1e-8          # max absolute coefficient change declaring convergence
MAX_IRLS_ITER = 100
P_CLAMP = 1e-4           # all logit-link predictions clipped into [P_CLAMP, 1-P_CLAMP]
RIDGE_FALLBACK = 1e-8    # diagonal added when the normal equations are singular
_WORK_CLAMP = 1e-10      # keeps IRLS working weights strictly positive


class RegressionError(RuntimeError):
    """Base class for fit failures."""


class AllZeroWeights(RegressionError):
    """Every fit weight is zero, so the objective is flat."""


class SingularDesign(RegressionError):
    """Weighted normal equations are rank deficient even after the ridge fallback."""


@dataclass(frozen=True)
class DesignSpec:
    """Model matrix description in terms of column selectors.

    Selectors are ``"a"``, ``"z"``, ``"s"``, ``"w1"``..``"wp"`` and
    ``"m1"``..``"mq"``.  The matrix always carries an intercept;
    ``interactions`` adds pairwise products; ``intercept_only`` drops
    everything but the intercept (the misspecified-fit device).
    """

    terms: tuple[str, ...] = ()
    interactions: tuple[tuple[str, str], ...] = ()
    intercept_only: bool = False

    @property
    def n_columns(self) -> int:
        if self.intercept_only:
            return 1
        return 1 + len(self.terms) + len(self.interactions)

    def intercept(self) -> "DesignSpec":
        """The intercept-only collapse of this design."""
        return DesignSpec(intercept_only=True)


@dataclass(frozen=True)
class FittedModel:
    """Coefficients plus enough context to predict on new rows."""

    coefficients: np.ndarray
    link: str                       # "logit" or "identity"
    design: DesignSpec | None
    converged: bool
    iterations: int
    ridged: bool = False


def _resolve_term(term: str, data: Dataset,
                  a: np.ndarray | float | None,
                  z: np.ndarray | float | None,
                  s: np.ndarray | float | None) -> np.ndarray:
    n = data.n
    if term == "a":
        source = data.a if a is None else a
    elif term == "z":
        source = data.z if z is None else z
    elif term == "s":
        source = data.s if s is None else s
    elif term.startswith("w"):
        j = int(term[1:]) - 1
        if not 0 <= j < data.n_w:
            raise DimensionMismatch(f"design term {term!r} exceeds {data.n_w} covariates")
        return data.w[:, j]
    elif term.startswith("m"):
        j = int(term[1:]) - 1
        if not 0 <= j < data.n_m:
            raise DimensionMismatch(f"design term {term!r} exceeds {data.n_m} mediators")
        return data.m[:, j]
    else:
        raise ValueError(f"unknown design term {term!r}")
    return np.broadcast_to(np.asarray(source, dtype=np.float64), (n,))


def design_matrix(design: DesignSpec, data: Dataset, *,
                  a: np.ndarray | float | None = None,
                  z: np.ndarray | float | None = None,
                  s: np.ndarray | float | None = None) -> np.ndarray:
    """Build the model matrix for `design` over the rows of `data`.

    Parameters
    ----------
    design : DesignSpec
    data : Dataset
    a, z, s : optional overrides
        Fixed scalar or per-row values substituted for the corresponding
        columns; this is how predictions at a', a* or at s = 0 are formed.

    Returns
    -------
    ndarray of shape (n, design.n_columns) with a leading intercept.
    """
    n = data.n
    out = np.empty((n, design.n_columns), dtype=np.float64)
    out[:, 0] = 1.0
    if design.intercept_only:
        return out
    values: dict[str, np.ndarray] = {}
    for j, term in enumerate(design.terms, start=1):
        col = _resolve_term(term, data, a, z, s)
        values[term] = col
        out[:, j] = col
    base = 1 + len(design.terms)
    for j, (left, right) in enumerate(design.interactions):
        lcol = values.get(left)
        if lcol is None:
            lcol = _resolve_term(left, data, a, z, s)
        rcol = values.get(right)
        if rcol is None:
            rcol = _resolve_term(right, data, a, z, s)
        out[:, base + j] = lcol * rcol
    return out


def _factor_checked(normal: np.ndarray):
    """Cholesky factor that also rejects numerically rank-deficient input.

    An exactly collinear design can slip through the factorization with
    rounding-noise pivots, so near-zero pivots are treated as failure.
    """
    factor = cho_factor(normal)
    pivots = np.abs(np.diag(factor[0]))
    head = np.abs(np.diag(normal)).max()
    if not np.isfinite(pivots).all() or pivots.min() ** 2 <= 1e-12 * head:
        raise np.linalg.LinAlgError("effectively singular normal equations")
    return factor


def _solve_weighted(X: np.ndarray, response: np.ndarray, weights: np.ndarray,
                    ridge: float) -> tuple[np.ndarray, bool]:
    """Solve the weighted normal equations, falling back to a ridge."""
    xtw = X.T * weights
    normal = xtw @ X
    moment = xtw @ response
    try:
        return cho_solve(_factor_checked(normal), moment), False
    except np.linalg.LinAlgError:
        pass
    if ridge <= 0:
        raise SingularDesign("weighted normal equations are singular")
    normal = normal + ridge * np.eye(X.shape[1])
    try:
        return cho_solve(cho_factor(normal), moment), True
    except np.linalg.LinAlgError as exc:
        raise SingularDesign("weighted normal equations are singular") from exc


def _check_fit_inputs(X: np.ndarray, y: np.ndarray,
                      weights: np.ndarray | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has shape {X.shape} against {y.shape[0]} responses")
    if weights is None:
        weights = np.ones(y.shape[0])
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != y.shape:
            raise DimensionMismatch("weights are not aligned with responses")
        if (weights < 0).any():
            raise ValueError("fit weights must be nonnegative")
    if not (weights > 0).any():
        raise AllZeroWeights("all fit weights are zero")
    return X, y, weights


def fit_binary(design: DesignSpec | None, X: np.ndarray, y: np.ndarray,
               weights: np.ndarray | None = None,
               offset: np.ndarray | None = None,
               ridge: float = RIDGE_FALLBACK) -> FittedModel:
    """Weighted logistic regression by iteratively reweighted least squares.

    Parameters
    ----------
    design : DesignSpec or None
        Recorded on the model for later matrix building; None for raw
        single-column fluctuation fits.
    X : (n, k) model matrix
    y : responses in [0, 1]; fractional values are accepted
        (quasi-binomial), as the fluctuation steps regress bounded
        pseudo-outcomes.
    weights : nonnegative fit weights, default all ones
    offset : fixed additions to the linear predictor, default zero
    ridge : diagonal added if the normal equations are singular;
        pass 0 to disable the fallback and fail instead.

    Returns
    -------
    FittedModel
        ``converged`` is False when the coefficient change never fell
        below `TOL_IRLS` within `MAX_IRLS_ITER` sweeps (e.g. under
        perfect separation); the last iterate is still returned and its
        predictions remain usable thanks to probability clamping.

    Raises
    ------
    AllZeroWeights, SingularDesign
    """
    X, y, weights = _check_fit_inputs(X, y, weights)
    if np.isnan(y).any():
        raise ValueError("responses contain NaN")
    if y.min() < 0 or y.max() > 1:
        raise ValueError("binary-link responses must lie in [0, 1]")
    if offset is None:
        offset = np.zeros(y.shape[0])
    else:
        offset = np.asarray(offset, dtype=np.float64)
    beta = np.zeros(X.shape[1])
    eta = offset.copy()
    converged = False
    ridged = False
    iterations = 0
    for iterations in range(1, MAX_IRLS_ITER + 1):
        prob = expit(eta)
        prob_w = np.clip(prob, _WORK_CLAMP, 1.0 - _WORK_CLAMP)
        variance = prob_w * (1.0 - prob_w)
        irls_weights = weights * variance
        working = (eta - offset) + (y - prob) / variance
        beta_new, used_ridge = _solve_weighted(X, working, irls_weights, ridge)
        ridged = ridged or used_ridge
        step = np.abs(beta_new - beta).max()
        beta = beta_new
        eta = offset + X @ beta
        if step < TOL_IRLS:
            converged = True
            break
    return FittedModel(coefficients=beta, link="logit", design=design,
                       converged=converged, iterations=iterations, ridged=ridged)


def fit_linear(design: DesignSpec | None, X: np.ndarray, y: np.ndarray,
               weights: np.ndarray | None = None,
               ridge: float = RIDGE_FALLBACK) -> FittedModel:
    """Weighted least squares; identity link.

    Used for pseudo-outcome regressions whose responses can leave [0, 1].
    Shares the singularity handling of `fit_binary`.
    """
    X, y, weights = _check_fit_inputs(X, y, weights)
    if np.isnan(y).any():
        raise ValueError("responses contain NaN")
    beta, ridged = _solve_weighted(X, y, weights, ridge)
    return FittedModel(coefficients=beta, link="identity", design=design,
                       converged=True, iterations=1, ridged=ridged)


def predict(model: FittedModel, X: np.ndarray,
            offset: np.ndarray | None = None) -> np.ndarray:
    """Evaluate a fitted model on a prebuilt matrix.

    Logit-link predictions are clamped into [P_CLAMP, 1 - P_CLAMP];
    identity-link predictions are returned as-is.  An offset supplied
    here is added to the linear predictor, matching how fluctuation
    models are evaluated.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.coefficients.shape[0]:
        raise DimensionMismatch(
            f"matrix has {X.shape[1] if X.ndim == 2 else '?'} columns, "
            f"model has {model.coefficients.shape[0]}")
    eta = X @ model.coefficients
    if offset is not None:
        eta = eta + np.asarray(offset, dtype=np.float64)
    if model.link == "logit":
        return np.clip(expit(eta), P_CLAMP, 1.0 - P_CLAMP)
    return eta
