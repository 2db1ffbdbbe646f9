"""Balanced regional panel: ingestion, imputation, lags, and summaries.

A panel is a balanced R x T grid (R regions, T years) holding one matrix per
variable with NaN marking missing cells. Panels are immutable after
construction (the arrays are write-protected); derived data comes back as new
objects or fresh arrays.

CSV schema (wide): header ``region,year,<var1>,<var2>,...``; empty cells are
missing values — no sentinel numbers. Employment tables use the long schema
``region,year,industry,parent,employment``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "PanelError",
    "PanelParseError",
    "RegionalPanel",
    "EmploymentTable",
    "DescriptiveStats",
    "VariableStats",
    "ImputationResult",
    "load_panel",
    "load_employment",
    "impute_by_apportionment",
    "lag",
    "descriptive_stats",
    "correlation_matrix",
]


class PanelError(ValueError):
    """Structural or semantic panel violation."""


class PanelParseError(PanelError):
    """Malformed input row; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _as_lines(source) -> Iterable[str]:
    if isinstance(source, str):
        with open(source, newline="", encoding="utf-8") as fh:
            return io.StringIO(fh.read())
    return source


@dataclass(frozen=True)
class RegionalPanel:
    """Balanced panel of named R x T variable matrices (NaN = missing)."""

    regions: tuple
    years: tuple
    data: dict
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.regions) < 2 or len(self.years) < 2:
            raise PanelError("panel requires at least 2 regions and 2 years")
        if len(set(self.regions)) != len(self.regions):
            raise PanelError("duplicate region identifiers")
        if list(self.years) != sorted(set(self.years)):
            raise PanelError("years must be strictly increasing")
        shape = (len(self.regions), len(self.years))
        frozen = {}
        for name, mat in self.data.items():
            arr = np.asarray(mat, dtype=float)
            if arr.shape != shape:
                raise PanelError(
                    f"variable {name!r} has shape {arr.shape}, expected {shape}")
            arr = arr.copy()
            arr.setflags(write=False)
            frozen[name] = arr
        object.__setattr__(self, "data", frozen)

    # -- shape -------------------------------------------------------------
    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def n_years(self) -> int:
        return len(self.years)

    @property
    def n_obs(self) -> int:
        return self.n_regions * self.n_years

    @property
    def variables(self) -> tuple:
        return tuple(self.data)

    # -- access ------------------------------------------------------------
    def matrix(self, name: str) -> np.ndarray:
        """Read-only R x T view of one variable."""
        try:
            return self.data[name]
        except KeyError:
            raise PanelError(f"unknown variable {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        """Region-major flattened copy, length R*T."""
        return self.matrix(name).ravel().copy()

    def with_variable(self, name: str, matrix) -> "RegionalPanel":
        """New panel with one variable added or replaced."""
        data = dict(self.data)
        data[name] = np.asarray(matrix, dtype=float)
        return RegionalPanel(regions=self.regions, years=self.years,
                             data=data, meta=dict(self.meta))

    # -- serialization -----------------------------------------------------
    def to_csv(self, stream=None, fmt: str = "%.17g") -> str | None:
        """Write the wide-schema CSV; returns the text when stream is None."""
        own = stream is None
        if own:
            stream = io.StringIO()
        writer = csv.writer(stream, lineterminator="\n")
        names = list(self.data)
        writer.writerow(["region", "year", *names])
        for i, region in enumerate(self.regions):
            for j, year in enumerate(self.years):
                cells = []
                for name in names:
                    v = self.data[name][i, j]
                    cells.append("" if math.isnan(v) else fmt % v)
                writer.writerow([region, year, *cells])
        if own:
            return stream.getvalue()
        return None


def load_panel(source, schema=None) -> RegionalPanel:
    """Parse a wide-schema CSV stream or path into a balanced panel.

    Parameters
    ----------
    source : path or text stream
    schema : optional list of variable names; all must be present in the
        header, and only those columns are loaded.

    Rows duplicated by (region, year) merge silently when their values agree
    and raise on conflict. Unbalanced grids raise listing the missing cells.
    """
    lines = _as_lines(source)
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise PanelParseError(1, "empty input") from None
    header = [h.strip() for h in header]
    if header[:2] != ["region", "year"]:
        raise PanelParseError(1, "header must start with 'region,year'")
    file_vars = header[2:]
    if schema is not None:
        missing = [v for v in schema if v not in file_vars]
        if missing:
            raise PanelError(f"schema variables absent from header: {missing}")
        names = list(schema)
    else:
        names = file_vars
    col_of = {v: file_vars.index(v) + 2 for v in names}

    rows: dict = {}
    regions: list = []
    years: set = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise PanelParseError(lineno, f"expected {len(header)} cells, got {len(row)}")
        region = row[0].strip()
        if not region:
            raise PanelParseError(lineno, "empty region identifier")
        try:
            year = int(row[1])
        except ValueError:
            raise PanelParseError(lineno, f"year {row[1]!r} is not an integer") from None
        values = []
        for v in names:
            cell = row[col_of[v]].strip()
            if cell == "":
                values.append(math.nan)
            else:
                try:
                    values.append(float(cell))
                except ValueError:
                    raise PanelParseError(
                        lineno, f"cell {cell!r} for {v!r} is not numeric") from None
        key = (region, year)
        if key in rows:
            old = rows[key]
            same = all(
                (math.isnan(a) and math.isnan(b)) or a == b
                for a, b in zip(old, values))
            if not same:
                raise PanelParseError(lineno, f"conflicting duplicate row for {key}")
            continue  # idempotent merge
        rows[key] = values
        if region not in regions:
            regions.append(region)
        years.add(year)

    years_sorted = sorted(years)
    missing_cells = [(r, y) for r in regions for y in years_sorted
                     if (r, y) not in rows]
    if missing_cells:
        raise PanelError(f"unbalanced panel; missing cells: {missing_cells}")
    if len(regions) < 2 or len(years_sorted) < 2:
        raise PanelError("panel requires at least 2 regions and 2 years")

    data = {}
    for k, name in enumerate(names):
        mat = np.empty((len(regions), len(years_sorted)))
        for i, r in enumerate(regions):
            for j, y in enumerate(years_sorted):
                mat[i, j] = rows[(r, y)][k]
        data[name] = mat
    return RegionalPanel(regions=tuple(regions), years=tuple(years_sorted),
                         data=data)


# ---------------------------------------------------------------------------
# employment tables


@dataclass(frozen=True)
class EmploymentTable:
    """Long-format employment records with a consistent industry→sector map."""

    rows: tuple  # of (region, year, industry, parent, employment)
    parents: dict

    def region_years(self) -> list:
        return sorted({(r, y) for r, y, *_ in self.rows})

    def employment(self, region: str, year: int) -> dict:
        out: dict = {}
        for r, y, ind, _, e in self.rows:
            if r == region and y == year:
                out[ind] = out.get(ind, 0.0) + e
        return out

    def national(self, year: int) -> dict:
        out: dict = {}
        for _, y, ind, _, e in self.rows:
            if y == year:
                out[ind] = out.get(ind, 0.0) + e
        return out


def load_employment(source) -> EmploymentTable:
    """Parse the long-schema employment CSV.

    Enforces: non-negative employment, numeric cells, and that every industry
    code maps to exactly one parent sector across the whole file.
    """
    lines = _as_lines(source)
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise PanelParseError(1, "empty input") from None
    expected = ["region", "year", "industry", "parent", "employment"]
    if header != expected:
        raise PanelParseError(1, f"header must be {','.join(expected)}")
    rows = []
    parents: dict = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 5:
            raise PanelParseError(lineno, f"expected 5 cells, got {len(row)}")
        region, ys, ind, parent, es = (c.strip() for c in row)
        try:
            year = int(ys)
        except ValueError:
            raise PanelParseError(lineno, f"year {ys!r} is not an integer") from None
        try:
            emp = float(es)
        except ValueError:
            raise PanelParseError(lineno, f"employment {es!r} is not numeric") from None
        if emp < 0:
            raise PanelParseError(lineno, f"negative employment {emp}")
        if ind in parents and parents[ind] != parent:
            raise PanelParseError(
                lineno,
                f"industry {ind!r} mapped to both {parents[ind]!r} and {parent!r}")
        parents[ind] = parent
        rows.append((region, year, ind, parent, emp))
    return EmploymentTable(rows=tuple(rows), parents=parents)


# ---------------------------------------------------------------------------
# imputation


@dataclass(frozen=True)
class ImputationResult:
    """Filled panel plus the footnote-style proxy-quality diagnostic.

    ``correlation`` relates apportionment predictions to observed values over
    fully observed years (1.0 by convention when nothing needed imputation);
    a fully missing year reproduces the national total exactly.
    """

    panel: "RegionalPanel"
    correlation: float
    filled_years: tuple
    filled_cells: int


def impute_by_apportionment(panel: RegionalPanel, target: str,
                            national: Mapping[int, float],
                            proxy: str) -> ImputationResult:
    """Fill missing target cells by splitting national totals along a proxy.

    For each year with missing target values, the missing cell (r, t) gets
    ``national[t] * proxy[r, t] / sum_r proxy[r, t]``. Observed cells are
    never touched. Raises when the proxy is itself missing where needed, the
    national total is absent, or the proxy column sums to zero.
    """
    tgt = panel.matrix(target).copy()
    prx = panel.matrix(proxy)
    filled_years = []
    filled_cells = 0
    for j, year in enumerate(panel.years):
        miss = np.isnan(tgt[:, j])
        if not miss.any():
            continue
        col = prx[:, j]
        if np.isnan(col).any():
            raise PanelError(
                f"proxy {proxy!r} has missing cells in year {year} needed for imputation")
        if year not in national:
            raise PanelError(f"national total for year {year} is absent")
        total = float(np.sum(col))
        if total == 0:
            raise PanelError(f"proxy {proxy!r} sums to zero in year {year}")
        fills = national[year] * col / total
        tgt[miss, j] = fills[miss]
        filled_years.append(year)
        filled_cells += int(miss.sum())

    if filled_cells == 0:
        corr = 1.0  # vacuous: nothing imputed, agreement is perfect
    else:
        corr = _apportionment_diagnostic(panel, target, national, proxy)
    out = panel.with_variable(target, tgt)
    return ImputationResult(panel=out, correlation=corr,
                            filled_years=tuple(filled_years),
                            filled_cells=filled_cells)


def _apportionment_diagnostic(panel, target, national, proxy) -> float:
    # correlate what apportionment would predict with what was observed,
    # over years where the target is fully observed; the observed year total
    # stands in when no national figure is supplied for such a year
    tgt = panel.matrix(target)
    prx = panel.matrix(proxy)
    pred, obs = [], []
    for j, year in enumerate(panel.years):
        col = tgt[:, j]
        if np.isnan(col).any():
            continue
        pcol = prx[:, j]
        if np.isnan(pcol).any() or np.sum(pcol) == 0:
            continue
        total = national.get(year, float(np.sum(col)))
        share = pcol / np.sum(pcol)
        pred.extend(total * share)
        obs.extend(col)
    if len(obs) < 2 or np.std(pred) == 0 or np.std(obs) == 0:
        return math.nan
    return float(np.corrcoef(pred, obs)[0, 1])


# ---------------------------------------------------------------------------
# lags


def lag(panel: RegionalPanel, variable: str, k: int) -> np.ndarray:
    """Shift a variable k years back within each region.

    The first k years of every region come back missing; values never cross
    region boundaries. k must be a positive integer below T.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k <= 0:
        raise PanelError("lag order must be a positive integer")
    if k >= panel.n_years:
        raise PanelError(f"lag {k} >= panel length {panel.n_years}")
    src = panel.matrix(variable)
    out = np.full_like(src, np.nan)
    out[:, k:] = src[:, :-k]
    return out


# ---------------------------------------------------------------------------
# summaries


@dataclass(frozen=True)
class VariableStats:
    count: int
    mean: float
    sd: float
    min: float
    max: float


@dataclass(frozen=True)
class DescriptiveStats:
    """Per-variable count/mean/sd/min/max (sample sd, n-1 denominator)."""

    variables: dict

    def names(self) -> tuple:
        return tuple(self.variables)

    def get(self, name: str) -> VariableStats:
        return self.variables[name]

    def to_csv(self, stream=None, fmt: str = "%.17g") -> str | None:
        own = stream is None
        if own:
            stream = io.StringIO()
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["name", "count", "mean", "sd", "min", "max"])
        for name, st in self.variables.items():
            w.writerow([name, st.count, fmt % st.mean, fmt % st.sd,
                        fmt % st.min, fmt % st.max])
        if own:
            return stream.getvalue()
        return None

    @classmethod
    def from_csv(cls, source) -> "DescriptiveStats":
        lines = _as_lines(source)
        reader = csv.reader(lines)
        header = [h.strip() for h in next(reader)]
        if header != ["name", "count", "mean", "sd", "min", "max"]:
            raise PanelParseError(1, "stats header must be name,count,mean,sd,min,max")
        out = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                name = row[0].strip()
                st = VariableStats(count=int(row[1]), mean=float(row[2]),
                                   sd=float(row[3]), min=float(row[4]),
                                   max=float(row[5]))
            except (IndexError, ValueError):
                raise PanelParseError(lineno, "malformed stats row") from None
            if not (st.min <= st.mean <= st.max) or st.sd < 0:
                raise PanelError(f"inconsistent stats for {name!r}")
            out[name] = st
        return cls(variables=out)


def descriptive_stats(panel: RegionalPanel, variables=None) -> DescriptiveStats:
    """Summary statistics over non-missing cells, per variable.

    All-missing variables are excluded with a warning rather than reported.
    """
    names = panel.variables if variables is None else tuple(variables)
    out = {}
    for name in names:
        col = panel.column(name)
        col = col[~np.isnan(col)]
        if col.size == 0:
            warnings.warn(f"variable {name!r} is entirely missing; excluded")
            continue
        sd = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
        out[name] = VariableStats(count=int(col.size), mean=float(np.mean(col)),
                                  sd=sd, min=float(np.min(col)),
                                  max=float(np.max(col)))
    return DescriptiveStats(variables=out)


def correlation_matrix(panel: RegionalPanel, variables) -> np.ndarray:
    """Pearson correlations over listwise-complete rows of the given variables.

    Unit diagonal, symmetric; a variable with no variance on the estimation
    rows raises naming it.
    """
    names = list(variables)
    if len(names) < 2:
        raise PanelError("correlation matrix needs at least 2 variables")
    cols = np.column_stack([panel.column(n) for n in names])
    keep = ~np.isnan(cols).any(axis=1)
    cols = cols[keep]
    if cols.shape[0] < 2:
        raise PanelError("fewer than 2 complete observations")
    for i, n in enumerate(names):
        if np.unique(cols[:, i]).size < 2:
            raise PanelError(f"variable {n!r} has no variance on complete rows")
    corr = np.corrcoef(cols, rowvar=False)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return corr
