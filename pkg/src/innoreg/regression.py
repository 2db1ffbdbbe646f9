"""Pooled-OLS machinery for balanced regional panels.

Covers the full reporting pipeline: least squares via orthogonal
factorization (never an explicit inverse), classical and
heteroskedasticity-robust covariances (HC0-HC3, HC1 default), variance
inflation factors, a two-way ANOVA variance decomposition with F tests,
orthogonalized interaction terms, grand-mean elasticities, and a suite
runner that renders a many-column comparison grid.

Estimation samples come from listwise deletion over every variable a spec
touches (after lagging); the achieved N is always reported, never padded.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _sps
from scipy.linalg import qr as _qr_pivot, solve_triangular

from .panel import PanelError, RegionalPanel, lag

__all__ = [
    "CollinearityError",
    "Regressor",
    "Interaction",
    "RegressionSpec",
    "RegressionResult",
    "VarianceDecomposition",
    "SuiteEntry",
    "pooled_ols",
    "robust_se",
    "robust_covariance",
    "vif",
    "variance_decomposition",
    "orthogonalize",
    "interaction_term",
    "elasticity",
    "run_model_suite",
    "format_suite_grid",
    "format_decomposition_table",
]

# two-sided normal critical values at 10/5/1%
_STAR_CUTS = ((2.5758293035489004, "***"), (1.959963984540054, "**"),
              (1.6448536269514722, "*"))


class CollinearityError(PanelError):
    """Design matrix is rank deficient; message names a collinear column set."""


def significance_stars(t: float) -> str:
    at = abs(t)
    for cut, stars in _STAR_CUTS:
        if at >= cut:
            return stars
    return ""


@dataclass(frozen=True)
class Regressor:
    """One design column: a panel variable taken at a given lag."""

    name: str
    lag: int = 0

    @property
    def label(self) -> str:
        return self.name if self.lag == 0 else f"{self.name}_L{self.lag}"


@dataclass(frozen=True)
class Interaction:
    """Product term built from an orthogonalized variable pair."""

    x1: str
    x2: str
    lag1: int = 0
    lag2: int = 0
    mode: str = "mutual"  # or residualize-second

    @property
    def label(self) -> str:
        a = self.x1 if self.lag1 == 0 else f"{self.x1}_L{self.lag1}"
        b = self.x2 if self.lag2 == 0 else f"{self.x2}_L{self.lag2}"
        return f"{a}*{b}"


@dataclass
class RegressionSpec:
    """Declarative model: dependent, regressors with lags, interactions."""

    dependent: str
    regressors: list
    interactions: list = field(default_factory=list)
    intercept: bool = True
    label: str = ""

    def __post_init__(self):
        self.regressors = [r if isinstance(r, Regressor) else Regressor(**r)
                           for r in self.regressors]
        self.interactions = [i if isinstance(i, Interaction) else Interaction(**i)
                             for i in self.interactions]
        labels = [r.label for r in self.regressors] + \
                 [i.label for i in self.interactions]
        if len(set(labels)) != len(labels):
            raise PanelError(f"duplicate design columns in spec {self.label!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionSpec":
        return cls(dependent=d["dependent"],
                   regressors=d.get("regressors", []),
                   interactions=d.get("interactions", []),
                   intercept=d.get("intercept", True),
                   label=str(d.get("label", "")))


@dataclass
class RegressionResult:
    label: str
    names: list
    beta: np.ndarray
    se_classical: np.ndarray
    se_robust: np.ndarray
    cov_classical: np.ndarray
    cov_robust: np.ndarray
    r_squared: float
    f_stat: float
    f_pvalue: float
    n: int
    k: int
    vif: dict | None
    avg_vif: float | None
    hc: str = "HC1"

    @property
    def t_robust(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.beta / self.se_robust

    def stars(self) -> list:
        return [significance_stars(t) for t in self.t_robust]

    def coefficient(self, name: str) -> float:
        return self.beta[self.names.index(name)]

    def summary(self, precision: int = 4) -> str:
        p = precision
        lines = [f"model {self.label or '(unnamed)'}  N={self.n}  "
                 f"R2={self.r_squared:.{p}f}  F={self.f_stat:.2f} "
                 f"(p={self.f_pvalue:.4g})  [{self.hc}]"]
        for i, nm in enumerate(self.names):
            lines.append(f"  {nm:<16} {self.beta[i]: .{p}f}{self.stars()[i]:<3} "
                         f"({self.se_robust[i]:.{p}f})")
        if self.avg_vif is not None:
            lines.append(f"  avg VIF {self.avg_vif:.2f}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# core fitting


def _fit_qr(X: np.ndarray, y: np.ndarray):
    n, k = X.shape
    if n <= k:
        raise PanelError(f"need N > k; got N={n}, k={k}")
    rank = np.linalg.matrix_rank(X)
    if rank < k:
        # pivoted QR points at a minimal offending column set
        _, _, piv = _qr_pivot(X, mode="economic", pivoting=True)
        bad = sorted(piv[rank:])
        raise CollinearityError(f"rank-deficient design; collinear columns {bad}")
    q, r = np.linalg.qr(X)
    beta = solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    rinv = solve_triangular(r, np.eye(k))
    xtx_inv = rinv @ rinv.T
    leverage = np.einsum("ij,ij->i", q, q)
    return beta, resid, xtx_inv, leverage


def robust_covariance(X: np.ndarray, residuals: np.ndarray,
                      hc: str = "HC1") -> np.ndarray:
    """Sandwich covariance of the OLS coefficients for a fitted design.

    HC0 is the plain White estimator; HC1 rescales by N/(N-k); HC2 and HC3
    deflate squared residuals by (1 - h) and (1 - h)^2.
    """
    X = np.asarray(X, dtype=float)
    e = np.asarray(residuals, dtype=float)
    n, k = X.shape
    _, r = np.linalg.qr(X)
    rinv = solve_triangular(r, np.eye(k))
    xtx_inv = rinv @ rinv.T
    hc = hc.upper()
    w = e * e
    if hc in ("HC2", "HC3"):
        q, _ = np.linalg.qr(X)
        h = np.einsum("ij,ij->i", q, q)
        denom = 1.0 - h
        denom[denom < 1e-12] = 1e-12
        w = w / denom if hc == "HC2" else w / denom ** 2
    elif hc not in ("HC0", "HC1"):
        raise ValueError(f"unknown robust variant {hc!r}")
    meat = (X * w[:, None]).T @ X
    cov = xtx_inv @ meat @ xtx_inv
    if hc == "HC1":
        cov = cov * (n / (n - k))
    return (cov + cov.T) / 2.0


def robust_se(X, residuals, hc: str = "HC1"):
    """Robust standard errors plus the full covariance they came from."""
    cov = robust_covariance(X, residuals, hc=hc)
    return np.sqrt(np.diag(cov)), cov


def vif(X: np.ndarray, names=None):
    """Variance inflation factors for a block of non-intercept regressors.

    Each auxiliary regression includes an intercept; VIF_j = 1/(1 - R_j^2).
    Computed from the inverse of the sample correlation matrix; columns
    caught in an exactly collinear set come back +inf with a warning.

    Returns (dict name -> VIF, average).
    """
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    if k < 2:
        raise PanelError("VIF needs at least 2 non-intercept regressors")
    if names is None:
        names = [f"x{j}" for j in range(k)]
    sd = X.std(axis=0, ddof=1)
    if np.any(sd == 0):
        j = int(np.argmax(sd == 0))
        raise PanelError(f"constant column {names[j]!r} in VIF input")
    corr = np.corrcoef(X, rowvar=False)
    values = np.empty(k)
    try:
        inv = np.linalg.inv(corr)
        values[:] = np.diag(inv)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        # singular correlation: fall back to explicit auxiliaries
        for j in range(k):
            others = np.delete(X, j, axis=1)
            a = np.column_stack([np.ones(n), others])
            coef, *_ = np.linalg.lstsq(a, X[:, j], rcond=None)
            resid = X[:, j] - a @ coef
            tss = np.sum((X[:, j] - X[:, j].mean()) ** 2)
            r2 = 1.0 - np.sum(resid ** 2) / tss
            if r2 >= 1.0 - 1e-12:
                warnings.warn(f"perfect collinearity at {names[j]!r}; VIF = inf")
                values[j] = np.inf
            else:
                values[j] = 1.0 / (1.0 - r2)
    out = {nm: float(v) for nm, v in zip(names, values)}
    finite = [v for v in values if np.isfinite(v)]
    avg = float(np.mean(values)) if finite and np.all(np.isfinite(values)) \
        else float("inf")
    return out, avg


# ---------------------------------------------------------------------------
# design assembly


def _raw_column(panel, name, lag_k):
    if lag_k == 0:
        return panel.column(name)
    return lag(panel, name, lag_k).ravel()


def orthogonalize(x1, x2, mode: str = "mutual"):
    """Residualize a correlated pair to tame interaction collinearity.

    mutual: each series is replaced by its residual from a regression on the
    other (plus intercept). residualize-second: the first series passes
    through untouched, only the second is residualized on the first.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape or x1.ndim != 1:
        raise PanelError("orthogonalize expects two equal-length series")
    for i, s in enumerate((x1, x2), start=1):
        if np.std(s) == 0:
            raise PanelError(f"series {i} is constant; cannot orthogonalize")

    def _resid(y, on):
        a = np.column_stack([np.ones_like(on), on])
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        return y - a @ coef

    if mode == "mutual":
        return _resid(x1, x2), _resid(x2, x1)
    if mode == "residualize-second":
        return x1.copy(), _resid(x2, x1)
    raise PanelError(f"unknown orthogonalization mode {mode!r}")


def interaction_term(s1, s2) -> np.ndarray:
    """Elementwise product of two complete series."""
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    if s1.shape != s2.shape:
        raise PanelError("interaction inputs differ in length")
    if np.isnan(s1).any() or np.isnan(s2).any():
        raise PanelError("interaction inputs must have no missing values")
    return s1 * s2


def _build_design(panel: RegionalPanel, spec: RegressionSpec):
    y_raw = panel.column(spec.dependent)
    reg_cols = [_raw_column(panel, r.name, r.lag) for r in spec.regressors]
    inter_inputs = [(_raw_column(panel, i.x1, i.lag1),
                     _raw_column(panel, i.x2, i.lag2)) for i in spec.interactions]

    stack = [y_raw, *reg_cols]
    for a, b in inter_inputs:
        stack.extend((a, b))
    mask = ~np.isnan(np.column_stack(stack)).any(axis=1)
    if mask.sum() == 0:
        raise PanelError(f"spec {spec.label!r} has no complete observations")

    y = y_raw[mask]
    cols, names = [], []
    if spec.intercept:
        cols.append(np.ones(mask.sum()))
        names.append("const")
    for r, col in zip(spec.regressors, reg_cols):
        cols.append(col[mask])
        names.append(r.label)
    for i, (a, b) in zip(spec.interactions, inter_inputs):
        oa, ob = orthogonalize(a[mask], b[mask], mode=i.mode)
        cols.append(interaction_term(oa, ob))
        names.append(i.label)
    return y, np.column_stack(cols), names


def pooled_ols(panel: RegionalPanel, spec: RegressionSpec,
               hc: str = "HC1") -> RegressionResult:
    """Fit one spec by pooled OLS with robust inference.

    The reported F statistic is a robust Wald test that all non-intercept
    coefficients vanish; stars on coefficients come from robust t statistics
    against the normal approximation (10/5/1%).
    """
    y, X, names = _build_design(panel, spec)
    n, k = X.shape
    beta, resid, xtx_inv, _ = _fit_qr(X, y)

    ssr = float(resid @ resid)
    sigma2 = ssr / (n - k)
    cov_classical = sigma2 * xtx_inv
    cov_robust = robust_covariance(X, resid, hc=hc)

    if spec.intercept:
        sst = float(np.sum((y - y.mean()) ** 2))
    else:
        sst = float(y @ y)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0

    slope_idx = [i for i, nm in enumerate(names) if nm != "const"]
    if slope_idx:
        b = beta[slope_idx]
        v = cov_robust[np.ix_(slope_idx, slope_idx)]
        try:
            wald = float(b @ np.linalg.solve(v, b))
            m = len(slope_idx)
            f_stat = wald / m
            f_p = float(_sps.f.sf(f_stat, m, n - k))
        except np.linalg.LinAlgError:
            f_stat, f_p = math.nan, math.nan
    else:
        f_stat, f_p = math.nan, math.nan

    vif_map, avg = (None, None)
    if len(slope_idx) >= 2:
        vif_map, avg = vif(X[:, slope_idx], [names[i] for i in slope_idx])

    return RegressionResult(
        label=spec.label, names=names, beta=beta,
        se_classical=np.sqrt(np.diag(cov_classical)),
        se_robust=np.sqrt(np.diag(cov_robust)),
        cov_classical=cov_classical, cov_robust=cov_robust,
        r_squared=float(r2), f_stat=f_stat, f_pvalue=f_p,
        n=n, k=k, vif=vif_map, avg_vif=avg, hc=hc.upper())


# ---------------------------------------------------------------------------
# variance decomposition


@dataclass(frozen=True)
class VarianceDecomposition:
    """Two-way (region x time) ANOVA shares and F tests, no interaction."""

    variable: str
    share_region: float
    share_time: float
    share_residual: float
    systematic: float
    f_region: float
    p_region: float
    f_time: float
    p_time: float
    df_region: int
    df_time: int
    df_residual: int


def variance_decomposition(panel: RegionalPanel,
                           variable: str) -> VarianceDecomposition:
    """Split a variable's variance into region, time, and residual shares.

    Requires a fully observed matrix; F_region has (R-1, (R-1)(T-1)) degrees
    of freedom, F_time has (T-1, (R-1)(T-1)).
    """
    m = panel.matrix(variable)
    if np.isnan(m).any():
        raise PanelError(f"variable {variable!r} has missing cells; "
                         "decomposition requires balance")
    r_n, t_n = m.shape
    grand = m.mean()
    ss_total = float(np.sum((m - grand) ** 2))
    ss_region = float(t_n * np.sum((m.mean(axis=1) - grand) ** 2))
    ss_time = float(r_n * np.sum((m.mean(axis=0) - grand) ** 2))
    ss_resid = ss_total - ss_region - ss_time
    if ss_total == 0:
        raise PanelError(f"variable {variable!r} is constant")
    df_r, df_t = r_n - 1, t_n - 1
    df_e = df_r * df_t
    mse = ss_resid / df_e

    def _f(ss_comp, df_comp):
        # zero explained SS is a zero F even when the residual vanishes too
        if ss_comp <= 0:
            return 0.0
        return (ss_comp / df_comp) / mse if mse > 0 else math.inf

    f_region = _f(ss_region, df_r)
    f_time = _f(ss_time, df_t)
    return VarianceDecomposition(
        variable=variable,
        share_region=ss_region / ss_total,
        share_time=ss_time / ss_total,
        share_residual=ss_resid / ss_total,
        systematic=1.0 - ss_resid / ss_total,
        f_region=f_region, p_region=float(_sps.f.sf(f_region, df_r, df_e)),
        f_time=f_time, p_time=float(_sps.f.sf(f_time, df_t, df_e)),
        df_region=df_r, df_time=df_t, df_residual=df_e)


# ---------------------------------------------------------------------------
# elasticities


def elasticity(beta: float, x_mean: float, y_mean: float) -> float:
    """Grand-mean elasticity beta * x_mean / y_mean."""
    if y_mean == 0:
        raise PanelError("elasticity undefined for zero dependent mean")
    return beta * x_mean / y_mean


# ---------------------------------------------------------------------------
# suite runner and rendering


@dataclass
class SuiteEntry:
    label: str
    result: RegressionResult | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None


def run_model_suite(panel: RegionalPanel, specs, hc: str = "HC1",
                    jobs: int = 1) -> list:
    """Fit every spec, isolating per-spec failures.

    Results keep the given spec order regardless of ``jobs``; a failing spec
    contributes an entry carrying its error text while the rest proceed.
    """
    specs = list(specs)

    def one(spec):
        try:
            return SuiteEntry(label=spec.label, result=pooled_ols(panel, spec, hc=hc))
        except Exception as exc:  # error isolation is the contract here
            return SuiteEntry(label=spec.label, error=str(exc))

    if jobs > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, specs))
    return [one(s) for s in specs]


def format_suite_grid(entries, precision: int = 4) -> str:
    """Markdown grid in the many-column journal layout.

    One row per design column (first-appearance order), cells holding
    ``coef<stars> (robust se)``; summary rows for R2, F, avg VIF, and N at
    the bottom.
    """
    p = precision
    order: list = []
    for e in entries:
        if e.ok:
            for nm in e.result.names:
                if nm != "const" and nm not in order:
                    order.append(nm)
    if any(e.ok and "const" in e.result.names for e in entries):
        order.append("const")

    header = ["Variables"] + [e.label or "?" for e in entries]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]

    def cell(e, nm):
        if not e.ok:
            return "failed" if nm == order[0] else "-"
        res = e.result
        if nm not in res.names:
            return "-"
        i = res.names.index(nm)
        return f"{res.beta[i]:.{p}f}{res.stars()[i]} ({res.se_robust[i]:.{p}f})"

    for nm in order:
        lines.append("| " + " | ".join([nm] + [cell(e, nm) for e in entries]) + " |")

    def foot(title, fn, fmt):
        cells = [fmt.format(fn(e.result)) if e.ok else "-" for e in entries]
        lines.append("| " + " | ".join([title] + cells) + " |")

    if entries:
        foot("R2", lambda r: r.r_squared, "{:.4f}")
        foot("F", lambda r: r.f_stat, "{:.2f}")
        foot("Avg VIF", lambda r: r.avg_vif if r.avg_vif is not None else math.nan,
             "{:.2f}")
        foot("N", lambda r: r.n, "{:d}")
    return "\n".join(lines)


def format_decomposition_table(decomps, precision: int = 3) -> str:
    """Markdown table mirroring the variance-decomposition layout.

    Columns: shares per source, systematic share, then F statistics with
    parenthesized p-values.
    """
    p = precision
    header = ["Variable", "BETWEEN-REGIONS/s2", "BETWEEN-TIME/s2",
              "RESIDUAL/s2", "SYSTEMATIC(MODEL)/s2", "F-REGION", "F-TIME"]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    for d in decomps:
        lines.append(
            "| " + " | ".join([
                d.variable,
                f"{d.share_region:.{p}f}",
                f"{d.share_time:.{p}f}",
                f"{d.share_residual:.{p}f}",
                f"{d.systematic:.{p}f}",
                f"{d.f_region:.2f} ({d.p_region:.2g})",
                f"{d.f_time:.2f} ({d.p_time:.2g})",
            ]) + " |")
    return "\n".join(lines)
