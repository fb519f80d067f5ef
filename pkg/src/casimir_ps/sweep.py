"""Sweeps over L/R, CSV records and the constrained quadratic fit."""
from __future__ import annotations

import concurrent.futures as futures
import csv
from dataclasses import dataclass, replace
from math import pi
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .energy import EnergyResult, Geometry, SolverParams, casimir_ratio

__all__ = [
    "NU_SCALAR",
    "CSV_COLUMNS",
    "SweepSpec",
    "FitResult",
    "FitError",
    "run_sweep",
    "write_csv",
    "read_csv",
    "fit_nu",
]

# slope 1 - rho ~ nu L/R of the scalar (Dirichlet + Neumann) estimate
NU_SCALAR = 5.0 / pi**2 - 1.0 / 3.0

CSV_COLUMNS = (
    "l_over_r",
    "rho",
    "energy_hbar_c_over_R",
    "lmax_used",
    "m_count",
    "xi_nodes",
    "est_rel_error",
)


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    epsilon_values: tuple
    params: SolverParams = SolverParams()
    output_path: Optional[str] = None

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilon_values)
        if not eps:
            raise ValueError("sweep needs at least one L/R value")
        if any(not e > 0.0 for e in eps):
            raise ValueError("all L/R values must be positive")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ValueError("L/R values must be strictly increasing")
        object.__setattr__(self, "epsilon_values", eps)


@dataclass(frozen=True)
class FitResult:
    """Fit of ``rho = 1 - nu x + nu2 x**2`` with ``x = L/R``."""

    nu: float
    nu2: float
    rms_residual: float
    n_points: int

    @property
    def ratio_to_scalar(self) -> float:
        return self.nu / NU_SCALAR

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - self.nu * x + self.nu2 * x * x


def _point(args):
    eps, params = args
    try:
        return casimir_ratio(Geometry.from_ratio(eps), params)
    except Exception as exc:
        raise RuntimeError(f"sweep point L/R={eps:g} failed: {exc}") from exc


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[EnergyResult]:
    """Evaluate every point of the sweep, in ascending L/R.

    Points are farmed out to ``workers`` processes; each point runs serially
    so results do not depend on the worker count. Any failing point aborts
    the sweep. The CSV is written when ``spec.output_path`` is set.
    """
    params = replace(spec.params, workers=1)
    tasks = [(e, params) for e in spec.epsilon_values]
    if workers > 1:
        with futures.ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_point, tasks))
    else:
        results = [_point(t) for t in tasks]
    if spec.output_path:
        write_csv(spec.output_path, spec.epsilon_values, results)
    return results


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, epsilons: Sequence[float], results: Sequence[EnergyResult]) -> None:
    """Write sweep rows with 17 significant digits; ``path`` may be a stream."""
    if hasattr(path, "write"):
        _write_rows(path, epsilons, results)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, epsilons, results)


def _write_rows(fh, epsilons, results):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for eps, r in zip(epsilons, results):
        writer.writerow(
            [
                _fmt(eps),
                _fmt(r.rho),
                _fmt(r.energy_hbar_c_over_R),
                _fmt(r.lmax_used),
                _fmt(r.m_count),
                _fmt(r.xi_nodes_used),
                _fmt(r.est_rel_error),
            ]
        )


def read_csv(path) -> list[dict]:
    """Rows of a sweep CSV with numeric fields converted."""
    rows = []
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh, skipinitialspace=True)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            rows.append(
                {
                    k: (int(row[k]) if k in ("lmax_used", "m_count", "xi_nodes") else float(row[k]))
                    for k in CSV_COLUMNS
                }
            )
    return rows


def fit_nu(
    samples: Iterable[tuple[float, float]],
    weights: Optional[Sequence[float]] = None,
) -> FitResult:
    """Least-squares fit of ``rho = 1 - nu x + nu2 x**2``.

    The model passes through ``rho(0) = 1`` by construction, leaving ``nu``
    and ``nu2`` free.

    Parameters
    ----------
    samples : iterable of (L/R, rho)
        at least three points with ``L/R <= 2`` and ``0 < rho < 1``
    weights : sequence of float, optional
        per-sample weights (e.g. ``1 / est_rel_error``)

    Raises
    ------
    FitError
        too few samples, samples outside the fit regime, or a degenerate
        design matrix
    """
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3:
        raise FitError("need at least three (L/R, rho) samples")
    x, y = data[:, 0], data[:, 1]
    if np.any(x <= 0.0) or np.any(x > 2.0):
        raise FitError("fit samples must satisfy 0 < L/R <= 2")
    if np.any(y <= 0.0) or np.any(y >= 1.0):
        raise FitError("fit samples must satisfy 0 < rho < 1")
    design = np.column_stack([-x, x * x])
    rhs = y - 1.0
    if weights is not None:
        w = np.sqrt(np.asarray(weights, dtype=float))
        if w.shape != x.shape or np.any(~(w > 0.0)):
            raise FitError("weights must be positive, one per sample")
        design = design * w[:, None]
        rhs = rhs * w
    coef, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=None)
    if rank < 2:
        raise FitError("degenerate fit: need at least two distinct L/R values")
    nu, nu2 = coef
    resid = y - (1.0 - nu * x + nu2 * x * x)
    return FitResult(float(nu), float(nu2), float(np.sqrt(np.mean(resid**2))), len(x))
