r"""Perfect-mirror Mie coefficients at imaginary frequency.

The table stores :math:`\tilde a_\ell = a_\ell(i\tilde\xi)e^{-2\tilde\xi}` and
:math:`\tilde b_\ell = b_\ell(i\tilde\xi)e^{-2\tilde\xi}`. With the scaled
Bessel functions the exponentials cancel exactly:

.. math::
    \tilde a_\ell = \frac{\pi}{2}(-1)^{\ell}
        \frac{(\ell+1)\tilde I_{\ell+1/2} + \tilde\xi\,\tilde I_{\ell+3/2}}
             {\ell\tilde K_{\ell+1/2} + \tilde\xi\,\tilde K_{\ell-1/2}},\qquad
    \tilde b_\ell = \frac{\pi}{2}(-1)^{\ell+1}
        \frac{\tilde I_{\ell+1/2}}{\tilde K_{\ell+1/2}}.

The numerator of :math:`a_\ell` was rewritten with the recurrence
:math:`\tilde\xi I_{\ell-1/2} = \tilde\xi I_{\ell+3/2} + (2\ell+1)I_{\ell+1/2}`
so that it is a sum of positive terms.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import log, pi

import numpy as np

from .specfun import ScaledArray, log_scaled_bessel_i_half, log_scaled_bessel_k_half

__all__ = ["ScaledMieTable", "mie_table"]


@dataclass(frozen=True)
class ScaledMieTable:
    """Scaled Mie coefficients for ``l = 1..lmax`` at one reduced frequency.

    Attributes
    ----------
    xi_tilde : float
        reduced imaginary frequency ``xi R / c``
    a_scaled, b_scaled : ScaledArray
        electric and magnetic coefficients times ``exp(-2 xi_tilde)``;
        index 0 holds ``l = 1``
    """

    xi_tilde: float
    a_scaled: ScaledArray
    b_scaled: ScaledArray

    @property
    def lmax(self) -> int:
        return len(self.a_scaled)

    def unscaled(self):
        """Plain ``(a, b)`` arrays; may overflow for large ``xi_tilde``."""
        with np.errstate(over="ignore"):
            f = np.exp(2.0 * self.xi_tilde)
        return self.a_scaled.values() * f, self.b_scaled.values() * f

    def with_zeroed(self, electric: bool = False, magnetic: bool = False) -> "ScaledMieTable":
        """Copy with the electric and/or magnetic coefficients set to zero."""
        zero = ScaledArray(np.zeros(self.lmax, dtype=int), np.full(self.lmax, -np.inf))
        return ScaledMieTable(
            self.xi_tilde,
            zero if electric else self.a_scaled,
            zero if magnetic else self.b_scaled,
        )


def mie_table(xi_tilde: float, lmax: int) -> ScaledMieTable:
    """Build the scaled Mie table of a perfectly reflecting sphere.

    Parameters
    ----------
    xi_tilde : float
        positive reduced frequency
    lmax : int
        highest multipole order, ``>= 1``

    Returns
    -------
    ScaledMieTable
    """
    if not xi_tilde > 0.0:
        raise ValueError(f"reduced frequency must be positive, got {xi_tilde}")
    if lmax < 1:
        raise ValueError(f"lmax must be >= 1, got {lmax}")
    x = float(xi_tilde)
    li = log_scaled_bessel_i_half(lmax + 1, x)
    lk = log_scaled_bessel_k_half(lmax, x)
    l = np.arange(1, lmax + 1)
    log_x = log(x)
    num_a = np.logaddexp(np.log(l + 1.0) + li[1:lmax + 1], log_x + li[2:lmax + 2])
    den_a = np.logaddexp(np.log(l) + lk[1:lmax + 1], log_x + lk[0:lmax])
    half_pi = log(pi / 2.0)
    sign_a = np.where(l % 2 == 0, 1, -1)
    a = ScaledArray(sign_a, half_pi + num_a - den_a)
    b = ScaledArray(-sign_a, half_pi + li[1:lmax + 1] - lk[1:lmax + 1])
    return ScaledMieTable(x, a, b)
