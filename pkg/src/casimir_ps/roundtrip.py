r"""Round-trip matrix of one azimuthal sector and its log-determinant.

Layout of a block: rows and columns ``[E, l = lmin..lmax | M, l = lmin..lmax]``.
The literal matrix has cross blocks ``i B`` (EM) and ``i C`` (ME); the
similarity transform ``diag(1, i)^{-1} D diag(1, i)`` turns them into ``-B``
and ``+C`` and leaves the determinant unchanged, so everything stays real.

With ``balance=True`` a second, diagonal similarity ``diag(sqrt|x_l|)``
(``x`` the Mie coefficient of the row) is applied. It symmetrises the
magnitudes of the entries, which otherwise range over ``xi**(l1 - l2)`` at
small frequency, and again leaves the determinant unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor

from .mie import ScaledMieTable
from .overlap import OverlapTable

__all__ = [
    "RoundTripBlock",
    "SectorLogDet",
    "SingularBlockError",
    "assemble_block",
    "logdet",
    "PIVOT_FLOOR",
]

PIVOT_FLOOR = 1e-14
# logdet above this is taken as a breakdown of the contractive round trip
POSITIVE_TOL = 1e-12


class SingularBlockError(ArithmeticError):
    """Raised when a sector matrix is numerically singular or non-physical."""


@dataclass(frozen=True)
class RoundTripBlock:
    """Sector matrix ``1 + coupling``.

    The coupling is stored on its own so that couplings far below machine
    epsilon survive into the log-determinant.
    """

    m: int
    xi_tilde: float
    n: int
    coupling: np.ndarray
    balanced: bool = False

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(2 * self.n) + self.coupling


@dataclass(frozen=True)
class SectorLogDet:
    m: int
    xi_tilde: float
    value: float
    pivot_diagnostics: float


def _entries(prefactor, row, col, f, balance):
    """exp of summed logs for prefactor * row_l1 * [col_l2] * f_{l1 l2}."""
    sign = row.sign[:, None] * f.sign
    if balance:
        logm = prefactor + 0.5 * (row.log[:, None] + col.log[None, :]) + f.log
    else:
        logm = prefactor + row.log[:, None] + f.log
    sign = np.where(np.isneginf(logm), 0, sign)
    with np.errstate(over="raise"):
        return np.where(sign == 0, 0.0, sign * np.exp(np.where(sign == 0, 0.0, logm)))


def assemble_block(
    mie: ScaledMieTable, overlaps: OverlapTable, balance: bool = False
) -> RoundTripBlock:
    """Assemble the real ``2n x 2n`` sector matrix.

    Parameters
    ----------
    mie : ScaledMieTable
        must cover ``l <= overlaps.lmax`` at the same reduced frequency
    overlaps : OverlapTable
    balance : bool
        apply the diagonal similarity described in the module docstring

    Returns
    -------
    RoundTripBlock
    """
    if mie.xi_tilde != overlaps.xi_tilde:
        raise ValueError("Mie and overlap tables were built at different frequencies")
    if mie.lmax < overlaps.lmax:
        raise ValueError(
            f"Mie table stops at l={mie.lmax}, overlaps need l={overlaps.lmax}"
        )
    lo, hi = overlaps.lmin, overlaps.lmax
    n = overlaps.n
    a = mie.a_scaled[lo - 1:hi]
    b = mie.b_scaled[lo - 1:hi]
    l = np.arange(lo, hi + 1)
    pre = np.log(0.5) + 0.5 * (np.log(2 * l + 1.0)[:, None] + np.log(2 * l + 1.0)[None, :])

    ee = _entries(pre, a, a, overlaps.f_plus, balance)
    mm = -_entries(pre, b, b, overlaps.f_plus, balance)
    em = -_entries(pre, a, b, overlaps.f_minus, balance)
    me = _entries(pre, b, a, overlaps.f_minus, balance)
    coupling = np.block([[ee, em], [me, mm]])
    return RoundTripBlock(overlaps.m, overlaps.xi_tilde, n, coupling, balance)


def _logdet_near_identity(x):
    """Elimination on ``I + x`` without pivoting, updating only ``x``.

    Valid for row-diagonally dominant ``I + x``; ``log1p`` of each pivot
    keeps full relative accuracy when the coupling is tiny.
    """
    x = np.array(x, dtype=float)
    n = x.shape[0]
    total = 0.0
    smallest = np.inf
    for k in range(n):
        piv = 1.0 + x[k, k]
        smallest = min(smallest, abs(piv))
        total += np.log1p(x[k, k])
        if k + 1 < n:
            factor = x[k + 1:, k] / piv
            x[k + 1:, k + 1:] -= np.outer(factor, x[k, k + 1:])
    return total, smallest


def logdet(block: RoundTripBlock) -> SectorLogDet:
    """``log det`` of a sector matrix with sign tracking.

    Uses LU with partial pivoting; near-identity blocks (row sums of the
    coupling below 1/2) go through an unpivoted elimination written in terms
    of ``matrix - 1`` so that very weak coupling is not rounded away.

    Raises
    ------
    SingularBlockError
        on a pivot below ``PIVOT_FLOOR``, a negative determinant, or a
        positive log-determinant
    """
    x = block.coupling
    if not np.all(np.isfinite(x)):
        raise SingularBlockError(f"non-finite entries in sector m={block.m}, xi={block.xi_tilde}")
    if np.max(np.sum(np.abs(x), axis=1)) < 0.5:
        value, smallest = _logdet_near_identity(x)
        sign = 1.0
    else:
        lu, ipiv = lu_factor(block.matrix, check_finite=False)
        piv = np.diag(lu)
        smallest = float(np.min(np.abs(piv)))
        swaps = np.count_nonzero(ipiv != np.arange(len(ipiv)))
        sign = (-1.0) ** swaps * np.prod(np.sign(piv))
        value = float(np.sum(np.log(np.abs(piv))))
    if smallest < PIVOT_FLOOR:
        raise SingularBlockError(
            f"pivot {smallest:.3e} below floor in sector m={block.m}, xi={block.xi_tilde}"
        )
    if sign < 0:
        raise SingularBlockError(
            f"negative determinant in sector m={block.m}, xi={block.xi_tilde}"
        )
    if value > POSITIVE_TOL:
        raise SingularBlockError(
            f"log det = {value:.3e} > 0 in sector m={block.m}, xi={block.xi_tilde}"
        )
    return SectorLogDet(block.m, block.xi_tilde, float(value), float(smallest))
