r"""Scaled overlap integrals between multipoles and plane waves.

In terms of the real Wigner factors of :mod:`casimir_ps.specfun` the two
imaginary phases cancel, leaving

.. math::
    F^{(\pm)}_{\ell_1\ell_2 m} = (-1)^{\ell_2+1}\int_1^\infty du\,
        e^{-2\tilde\xi(1+\varepsilon)u}
        \left[\mathfrak{d}^{\ell_1}_{m,1}\mathfrak{d}^{\ell_2}_{m,1}
        \pm \mathfrak{d}^{\ell_1}_{-m,1}\mathfrak{d}^{\ell_2}_{-m,1}\right].

The table stores :math:`\tilde F = F\,e^{2\tilde\xi}`. The bracket is a
polynomial of degree :math:`\ell_1+\ell_2` in ``u``, so after
``u = 1 + t/beta`` Gauss-Laguerre quadrature with more than ``lmax`` nodes is
exact up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .specfun import ScaledArray, log_wigner_d_table

__all__ = ["OverlapTable", "overlap_table", "laguerre_rule", "CONVERGENCE_RTOL"]

CONVERGENCE_RTOL = 1e-6


@lru_cache(maxsize=64)
def laguerre_rule(n: int):
    """Gauss-Laguerre nodes and log-weights for ``int_0^inf e^-t f(t) dt``."""
    t, w = np.polynomial.laguerre.laggauss(n)
    with np.errstate(divide="ignore"):
        lw = np.log(w)
    t.flags.writeable = False
    lw.flags.writeable = False
    return t, lw


@dataclass(frozen=True)
class OverlapTable:
    """Scaled overlap integrals of one azimuthal sector.

    ``f_plus`` and ``f_minus`` are square :class:`ScaledArray` matrices
    indexed by ``(l1 - lmin, l2 - lmin)``.
    """

    m: int
    xi_tilde: float
    epsilon: float
    lmin: int
    lmax: int
    f_plus: ScaledArray
    f_minus: ScaledArray
    nodes: int
    accuracy_warning: bool = False

    @property
    def n(self) -> int:
        return self.lmax - self.lmin + 1


def _gram_log(logd, lw):
    """log of sum_k exp(logd[i,k] + logd[j,k] + lw[k]) for all (i, j)."""
    half = logd + 0.5 * lw
    shift = half.max(axis=1)
    a = np.exp(half - shift[:, None])
    with np.errstate(divide="ignore"):
        return np.log(a @ a.T) + shift[:, None] + shift[None, :]


def _combine(log_p, log_q, sign):
    """log-magnitude and sign of exp(log_p) + sign*exp(log_q)."""
    if sign > 0:
        return np.ones(log_p.shape, dtype=int), np.logaddexp(log_p, log_q)
    hi = np.maximum(log_p, log_q)
    lo = np.minimum(log_p, log_q)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = hi + np.log(-np.expm1(lo - hi))
    s = np.where(log_p > log_q, 1, np.where(log_p < log_q, -1, 0))
    mag = np.where(s == 0, -np.inf, mag)
    return s, mag


def _tables(m, xi_tilde, epsilon, lmax, nodes):
    beta = 2.0 * xi_tilde * (1.0 + epsilon)
    t, lw = laguerre_rule(nodes)
    u = 1.0 + t / beta
    log_p = _gram_log(log_wigner_d_table(lmax, m, u), lw)
    log_q = _gram_log(log_wigner_d_table(lmax, -m, u), lw)
    # e^{2 xi} e^{-beta u} du = e^{-2 xi eps} e^{-t} dt / beta
    offset = -np.log(beta) - 2.0 * xi_tilde * epsilon
    l2 = np.arange(max(1, abs(m)), lmax + 1)
    parity = np.where(l2 % 2 == 1, 1, -1)[None, :]
    out = []
    for branch in (1, -1):
        s, mag = _combine(log_p, log_q, branch)
        out.append(ScaledArray(s * parity, mag + offset))
    return out


def overlap_table(
    m: int,
    xi_tilde: float,
    epsilon: float,
    lmax: int,
    nodes: int = 40,
    check: bool = False,
) -> OverlapTable:
    """Compute the scaled overlap integrals for one sector.

    Parameters
    ----------
    m : int
        azimuthal index, ``|m| <= lmax``
    xi_tilde : float
        reduced frequency, ``> 0``
    epsilon : float
        gap over radius, ``> 0``
    lmax : int
        highest multipole order
    nodes : int
        Gauss-Laguerre order; raised to ``lmax + 1`` when smaller so the
        polynomial integrand is integrated exactly
    check : bool
        recompute with twice the nodes and set ``accuracy_warning`` when any
        entry moves by more than ``CONVERGENCE_RTOL``

    Returns
    -------
    OverlapTable
    """
    if not xi_tilde > 0.0:
        raise ValueError(f"reduced frequency must be positive, got {xi_tilde}")
    if not epsilon > 0.0:
        raise ValueError(f"L/R must be positive, got {epsilon}")
    if nodes < 8:
        raise ValueError(f"need at least 8 quadrature nodes, got {nodes}")
    nodes = max(nodes, lmax + 1)
    f_plus, f_minus = _tables(m, xi_tilde, epsilon, lmax, nodes)
    warn = False
    if check:
        ref_plus, ref_minus = _tables(m, xi_tilde, epsilon, lmax, 2 * nodes)
        for a, b in ((f_plus, ref_plus), (f_minus, ref_minus)):
            va, vb = a.values(), b.values()
            scale = np.maximum(np.abs(vb), np.finfo(float).tiny)
            if np.any(np.abs(va - vb) > CONVERGENCE_RTOL * scale):
                warn = True
    return OverlapTable(
        m=m,
        xi_tilde=float(xi_tilde),
        epsilon=float(epsilon),
        lmin=max(1, abs(m)),
        lmax=lmax,
        f_plus=f_plus,
        f_minus=f_minus,
        nodes=nodes,
        accuracy_warning=warn,
    )
