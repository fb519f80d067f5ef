r"""Plane-sphere Casimir energy normalised to the proximity force approximation.

All quantities are dimensionless: lengths in units of the sphere radius,
energies in units of :math:`\hbar c/R`. With :math:`\varepsilon = L/R`,

.. math::
    \rho = -\frac{360}{\pi^4}\varepsilon^2\int_0^\infty d\tilde\xi
           \sum_{m=-\infty}^{\infty}\log\det\mathcal{D}^{(m)}(\tilde\xi).

The frequency integral uses Gauss-Laguerre quadrature after
``xi = t / (2 eps)``; the sum over ``m`` is folded onto ``m >= 0``.
"""
from __future__ import annotations

import concurrent.futures as futures
from dataclasses import dataclass, field
from math import ceil, pi
from typing import Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar

from .mie import mie_table
from .overlap import laguerre_rule, overlap_table
from .roundtrip import SingularBlockError, assemble_block, logdet

__all__ = [
    "Geometry",
    "SolverParams",
    "EnergyResult",
    "ConvergenceError",
    "LmaxCapError",
    "pfa_energy",
    "small_sphere_energy",
    "small_sphere_ratio",
    "choose_lmax",
    "integrand",
    "casimir_ratio",
]

POLARIZATIONS = ("both", "electric", "magnetic")


class ConvergenceError(RuntimeError):
    """Frequency quadrature did not converge to the requested tolerance."""


class LmaxCapError(ValueError):
    """The truncation policy asks for more multipoles than allowed."""


@dataclass(frozen=True)
class Geometry:
    """Sphere of radius ``radius`` at distance ``gap`` above a plane."""

    radius: float
    gap: float

    def __post_init__(self):
        if not (self.radius > 0.0 and np.isfinite(self.radius)):
            raise ValueError(f"radius must be positive and finite, got {self.radius}")
        if not (self.gap > 0.0 and np.isfinite(self.gap)):
            raise ValueError(f"gap must be positive and finite, got {self.gap}")

    @classmethod
    def from_ratio(cls, l_over_r: float) -> "Geometry":
        return cls(1.0, float(l_over_r))

    @property
    def center_distance(self) -> float:
        return self.gap + self.radius

    @property
    def epsilon(self) -> float:
        return self.gap / self.radius


@dataclass(frozen=True)
class SolverParams:
    """Numerical settings.

    ``lmax`` is an integer or ``"auto"`` (``ceil(alpha / eps)`` capped at
    ``lmax_cap``). ``rel_tol`` is the target accuracy of rho; the run fails
    when doubling the frequency nodes moves rho by more than ten times it.
    """

    lmax: Union[int, str] = "auto"
    xi_nodes: int = 40
    u_nodes: int = 40
    m_tail_tol: float = 1e-10
    alpha: float = 4.0
    lmax_cap: int = 40
    rel_tol: float = 1e-4
    estimate_error: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.lmax != "auto" and not (isinstance(self.lmax, (int, np.integer)) and self.lmax >= 1):
            raise ValueError(f"lmax must be a positive integer or 'auto', got {self.lmax!r}")
        for name in ("xi_nodes", "u_nodes", "lmax_cap", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.u_nodes < 8:
            raise ValueError("u_nodes must be at least 8")
        if not 0.0 < self.m_tail_tol <= 1e-2:
            raise ValueError(f"m_tail_tol must lie in (0, 1e-2], got {self.m_tail_tol}")
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")


@dataclass(frozen=True)
class EnergyResult:
    rho: float
    energy_hbar_c_over_R: float
    lmax_used: int
    m_count: int
    xi_nodes_used: int
    est_rel_error: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def energy_joule(self, radius_m: float) -> float:
        """Energy in joule for a sphere of radius ``radius_m`` metres."""
        return self.energy_hbar_c_over_R * hbar * SPEED_OF_LIGHT / radius_m


def pfa_energy(geom: Geometry) -> float:
    """PFA energy ``-pi^3 R / (720 L^2)`` in units of hbar c / R."""
    return -pi**3 / (720.0 * geom.epsilon**2)


def small_sphere_energy(geom: Geometry) -> float:
    """Leading large-distance energy ``-(9/16 pi) R^3 / Lc^4`` in hbar c / R.

    Only meaningful for ``L/R`` of about 5 and beyond.
    """
    return -9.0 / (16.0 * pi) / (1.0 + geom.epsilon) ** 4


def small_sphere_ratio(epsilon: float) -> float:
    """``small_sphere_energy / pfa_energy = (405/pi^4) eps^2 / (1+eps)^4``."""
    return 405.0 / pi**4 * epsilon**2 / (1.0 + epsilon) ** 4


def choose_lmax(epsilon: float, alpha: float = 4.0, cap: int = 40) -> int:
    """Multipole truncation ``ceil(alpha / eps)``, at least 1.

    Raises
    ------
    LmaxCapError
        when the policy exceeds ``cap``; the message names the smallest
        ``L/R`` reachable with this cap
    """
    if not epsilon > 0.0:
        raise ValueError(f"L/R must be positive, got {epsilon}")
    lmax = max(1, ceil(alpha / epsilon))
    if lmax > cap:
        raise LmaxCapError(
            f"L/R={epsilon:g} needs lmax={lmax} > cap {cap}; "
            f"smallest supported L/R is {alpha / cap:g} (raise the cap or alpha/eps)"
        )
    return lmax


def _resolve_lmax(epsilon, params):
    if params.lmax == "auto":
        return choose_lmax(epsilon, params.alpha, params.lmax_cap)
    return int(params.lmax)


def _sector_sum(xi_tilde, epsilon, lmax, params, polarization):
    """Return (sum over m of log det, number of |m| sectors, tail ratio)."""
    mie = mie_table(xi_tilde, lmax)
    if polarization == "electric":
        mie = mie.with_zeroed(magnetic=True)
    elif polarization == "magnetic":
        mie = mie.with_zeroed(electric=True)
    total = 0.0
    tail = 0.0
    for m in range(lmax + 1):
        ov = overlap_table(m, xi_tilde, epsilon, lmax, params.u_nodes)
        try:
            value = logdet(assemble_block(mie, ov, balance=True)).value
        except SingularBlockError as exc:
            raise SingularBlockError(f"{exc} (L/R={epsilon:g}, lmax={lmax})") from exc
        contrib = value if m == 0 else 2.0 * value
        total += contrib
        if total == 0.0:
            return total, m + 1, 0.0
        if m > 0 and abs(contrib) < params.m_tail_tol * abs(total):
            tail = abs(contrib / total)
            return total, m + 1, tail
    return total, lmax + 1, tail


def integrand(
    xi_tilde: float,
    epsilon: float,
    params: SolverParams = SolverParams(),
    polarization: str = "both",
) -> float:
    """Sum over all ``m`` of ``log det D^(m)`` at one reduced frequency.

    ``polarization`` set to ``"electric"`` or ``"magnetic"`` keeps only
    that family of Mie coefficients. The result is never positive.
    """
    if not xi_tilde > 0.0:
        raise ValueError(f"reduced frequency must be positive, got {xi_tilde}")
    if polarization not in POLARIZATIONS:
        raise ValueError(f"polarization must be one of {POLARIZATIONS}")
    lmax = _resolve_lmax(epsilon, params)
    return _sector_sum(xi_tilde, epsilon, lmax, params, polarization)[0]


def _node_task(args):
    xi, epsilon, lmax, params, polarization = args
    return _sector_sum(xi, epsilon, lmax, params, polarization)


def _quadrature(epsilon, lmax, params, polarization, nodes):
    t, lw = laguerre_rule(nodes)
    xs = t / (2.0 * epsilon)
    tasks = [(float(x), epsilon, lmax, params, polarization) for x in xs]
    if params.workers > 1:
        with futures.ProcessPoolExecutor(params.workers) as pool:
            out = list(pool.map(_node_task, tasks))
    else:
        out = [_node_task(task) for task in tasks]
    values = np.array([o[0] for o in out])
    weights = np.exp(lw + t) / (2.0 * epsilon)
    # fixed summation order: ascending node index
    integral = 0.0
    for w, v in zip(weights, values):
        integral += w * v
    rho = -360.0 / pi**4 * epsilon**2 * integral
    return rho, values, weights, out


def casimir_ratio(
    geom: Geometry,
    params: SolverParams = SolverParams(),
    polarization: str = "both",
) -> EnergyResult:
    """Ratio of the plane-sphere Casimir energy to its PFA value.

    Parameters
    ----------
    geom : Geometry
    params : SolverParams
    polarization : str
        ``"both"`` (physical), or ``"electric"``/``"magnetic"`` to keep one
        family of Mie coefficients

    Returns
    -------
    EnergyResult
        ``est_rel_error`` is the largest of the node-doubling change, the
        relative size of the last ``m`` sector kept, and the change of the
        dominant integrand value under ``lmax -> lmax + 2``

    Raises
    ------
    ConvergenceError
        node doubling changed rho by more than ``10 * params.rel_tol``
    """
    if polarization not in POLARIZATIONS:
        raise ValueError(f"polarization must be one of {POLARIZATIONS}")
    eps = geom.epsilon
    lmax = _resolve_lmax(eps, params)
    rho, values, weights, out = _quadrature(eps, lmax, params, polarization, params.xi_nodes)
    m_count = max(o[1] for o in out)
    m_tail = max(o[2] for o in out)
    diagnostics = {"m_tail": m_tail, "xi_doubling": None, "lmax_delta": None}
    est = m_tail
    if params.estimate_error and rho != 0.0:
        rho2 = _quadrature(eps, lmax, params, polarization, 2 * params.xi_nodes)[0]
        doubling = abs(rho2 - rho) / abs(rho)
        diagnostics["xi_doubling"] = doubling
        if doubling > 10.0 * params.rel_tol:
            raise ConvergenceError(
                f"L/R={eps:g}: doubling xi nodes changed rho by {doubling:.2e} "
                f"(tolerance {10.0 * params.rel_tol:.1e})"
            )
        k = int(np.argmax(np.abs(weights * values)))
        xi_k = float(laguerre_rule(params.xi_nodes)[0][k] / (2.0 * eps))
        coarse = values[k]
        fine = _sector_sum(xi_k, eps, lmax + 2, params, polarization)[0]
        lmax_delta = abs(fine - coarse) / abs(fine) if fine != 0.0 else 0.0
        diagnostics["lmax_delta"] = lmax_delta
        est = max(est, doubling, lmax_delta)
    return EnergyResult(
        rho=float(rho),
        energy_hbar_c_over_R=float(rho * pfa_energy(geom)),
        lmax_used=lmax,
        m_count=int(m_count),
        xi_nodes_used=params.xi_nodes,
        est_rel_error=float(est),
        diagnostics=diagnostics,
    )
