r"""Overflow-safe special functions for the plane-sphere round trip.

Two families are needed:

* exponentially scaled modified Bessel functions of half-integer order,
  :math:`\tilde I_{\ell+1/2}(x) = I_{\ell+1/2}(x)e^{-x}` and
  :math:`\tilde K_{\ell+1/2}(x) = K_{\ell+1/2}(x)e^{+x}`;
* Wigner functions :math:`d^\ell_{m,1}(\theta)` continued to imaginary angles
  with :math:`\cos\theta = u \ge 1` and :math:`\sin\theta = -i\sqrt{u^2-1}`.

Values are carried as a sign and a natural log-magnitude so that the
:math:`u^\ell` growth of the Wigner functions and the :math:`x^{\pm\ell}`
behaviour of the Bessel functions never overflow.

Phase convention for the Wigner functions
-----------------------------------------
With the Edmonds sum formula and the half-angle values
:math:`\cos(\theta/2) = c = \sqrt{(u+1)/2}` and
:math:`\sin(\theta/2) = -i\,t`, :math:`t = \sqrt{(u-1)/2}`, every term of the
sum carries the same phase, so

.. math::
    d^\ell_{m,1}(\theta) = i^{m-1}\,\mathfrak{d}^\ell_{m,1}(u),\qquad
    d^\ell_{m,1}(\pi-\theta) = (-1)^{\ell+m-1}\,i^{m-1}\,\bar{\mathfrak{d}}^\ell_{m,1}(u),

with real, non-negative factors

.. math::
    \mathfrak{d}^\ell_{m,1}(u) = \sum_s
        \frac{\sqrt{(\ell+m)!(\ell-m)!(\ell+1)!(\ell-1)!}}
             {(\ell+1-s)!\,s!\,(m-1+s)!\,(\ell-m-s)!}
        c^{2\ell+1-m-2s}\,t^{m-1+2s},
    \qquad \bar{\mathfrak{d}}^\ell_{m,1}(u) = \mathfrak{d}^\ell_{-m,1}(u).

Only products of two functions at equal ``m`` are used downstream, so the
phases reduce to real signs; see :mod:`casimir_ps.overlap`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log, pi

import numpy as np

__all__ = [
    "ScaledValue",
    "ScaledArray",
    "HyperbolicAngle",
    "scaled_bessel_i_half",
    "scaled_bessel_k_half",
    "log_scaled_bessel_i_half",
    "log_scaled_bessel_k_half",
    "wigner_d_column",
    "wigner_d_column_reflected",
    "log_wigner_d_table",
]

MAX_ORDER = 400


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as ``sign * exp(log_magnitude)``."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign}")

    @classmethod
    def from_float(cls, x: float) -> "ScaledValue":
        if x == 0.0:
            return cls(0, -np.inf)
        return cls(1 if x > 0 else -1, log(abs(x)))

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * float(np.exp(self.log_magnitude))

    def __float__(self):
        return self.value

    def __mul__(self, other: "ScaledValue") -> "ScaledValue":
        sign = self.sign * other.sign
        if sign == 0:
            return ScaledValue(0, -np.inf)
        return ScaledValue(sign, self.log_magnitude + other.log_magnitude)

    def __neg__(self) -> "ScaledValue":
        return ScaledValue(-self.sign, self.log_magnitude)


@dataclass(frozen=True)
class ScaledArray:
    """Vectorised counterpart of :class:`ScaledValue`.

    ``sign`` holds -1/0/+1 and ``log`` the log-magnitude (``-inf`` for zeros).
    Indexing with an integer returns a :class:`ScaledValue`.
    """

    sign: np.ndarray
    log: np.ndarray

    @classmethod
    def from_values(cls, x) -> "ScaledArray":
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return cls(np.sign(x).astype(int), np.log(np.abs(x)))

    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.where(self.sign == 0, 0.0, self.sign * np.exp(self.log))

    def __len__(self):
        return len(self.sign)

    @property
    def shape(self):
        return np.shape(self.sign)

    def __getitem__(self, idx):
        sign, logm = self.sign[idx], self.log[idx]
        if np.ndim(sign) == 0:
            return ScaledValue(int(sign), float(logm))
        return ScaledArray(sign, logm)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __mul__(self, other: "ScaledArray") -> "ScaledArray":
        return ScaledArray(self.sign * other.sign, self.log + other.log)


@dataclass(frozen=True)
class HyperbolicAngle:
    r"""Imaginary rotation angle, stored as ``u = cos(theta) >= 1`` and
    ``s = |sin(theta)| = sqrt(u**2 - 1)``."""

    u: float
    s: float

    @classmethod
    def from_cos(cls, u: float) -> "HyperbolicAngle":
        if not u >= 1.0:
            raise ValueError(f"hyperbolic angle requires cos(theta) >= 1, got {u}")
        return cls(float(u), float(np.sqrt((u - 1.0) * (u + 1.0))))

    def __post_init__(self):
        if not self.u >= 1.0 or self.s < 0.0:
            raise ValueError(f"invalid hyperbolic angle u={self.u}, s={self.s}")


def _check_bessel_args(lmax, x):
    if lmax < 0:
        raise ValueError(f"order must be non-negative, got {lmax}")
    if lmax > MAX_ORDER:
        raise ValueError(f"order {lmax} exceeds supported maximum {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)):
        raise ValueError("Bessel argument must be positive")
    return x


def log_scaled_bessel_k_half(lmax: int, x):
    r"""Return ``log K~_{l+1/2}(x)`` for ``l = 0..lmax``.

    Upward recurrence on the ratios ``K_{l+3/2}/K_{l+1/2}`` seeded by the
    closed forms of orders 1/2 and 3/2. All ratios exceed one, so the
    recurrence is free of cancellation.

    Parameters
    ----------
    lmax : int
        highest order index
    x : float or np.ndarray
        positive argument(s)

    Returns
    -------
    np.ndarray
        shape ``(lmax+1,) + np.shape(x)``
    """
    x = _check_bessel_args(lmax, x)
    out = np.empty((lmax + 1,) + x.shape)
    out[0] = 0.5 * np.log(pi / (2.0 * x))
    q = np.ones_like(x)
    for k in range(lmax):
        q = 1.0 / q + (2 * k + 1) / x
        out[k + 1] = out[k] + np.log(q)
    return out


def _miller_start(lmax, x):
    # ratio recursion needs to start well beyond both lmax and x
    xm = float(np.max(x))
    return lmax + 20 + int(xm + 12.0 * np.sqrt(xm))


def log_scaled_bessel_i_half(lmax: int, x):
    r"""Return ``log I~_{l+1/2}(x)`` for ``l = 0..lmax``.

    Ratios ``I_{l+3/2}/I_{l+1/2}`` come from a downward (Miller) recurrence
    started far above ``lmax``; the sequence is normalised by the closed
    form ``I_{1/2}(x) = sqrt(2/(pi x)) sinh x``.

    Returns
    -------
    np.ndarray
        shape ``(lmax+1,) + np.shape(x)``
    """
    x = _check_bessel_args(lmax, x)
    out = np.empty((lmax + 1,) + x.shape)
    out[0] = 0.5 * np.log(2.0 / (pi * x)) + np.log(-np.expm1(-2.0 * x) / 2.0)
    if lmax == 0:
        return out
    r = np.zeros_like(x)
    ratios = np.empty((lmax,) + x.shape)
    for k in range(_miller_start(lmax, x), -1, -1):
        r = 1.0 / ((2 * k + 3) / x + r)
        if k < lmax:
            ratios[k] = r
    out[1:] = out[0] + np.cumsum(np.log(ratios), axis=0)
    return out


def scaled_bessel_i_half(l: int, x: float) -> ScaledValue:
    r"""``I_{l+1/2}(x) e^{-x}`` as a :class:`ScaledValue`."""
    if l < 0:
        raise ValueError(f"order must be non-negative, got {l}")
    return ScaledValue(1, float(log_scaled_bessel_i_half(l, x)[l]))


def scaled_bessel_k_half(l: int, x: float) -> ScaledValue:
    r"""``K_{l+1/2}(x) e^{+x}`` as a :class:`ScaledValue`."""
    if l < 0:
        raise ValueError(f"order must be non-negative, got {l}")
    return ScaledValue(1, float(log_scaled_bessel_k_half(l, x)[l]))


def _log_seed(m, log_c, log_t):
    """log of the real factor at the lowest order l0 = max(1, |m|)."""
    if m == 0:
        return 0.5 * log(2.0) + log_c + log_t
    l0 = abs(m)
    log_norm = 0.5 * (lgamma(2 * l0 + 1) - lgamma(l0 + 2) - lgamma(l0))
    pc, pt = (l0 + 1, l0 - 1) if m > 0 else (l0 - 1, l0 + 1)
    out = np.full_like(log_c, log_norm)
    if pc:
        out = out + pc * log_c
    if pt:
        out = out + pt * log_t
    return out


def log_wigner_d_table(lmax: int, m: int, u) -> np.ndarray:
    r"""Log of the real Wigner factor for ``l = max(1,|m|)..lmax``.

    Runs the three-term recurrence in ``l`` on successive ratios
    ``d_{l+1}/d_l``, which are positive for ``u >= 1``; the upward direction
    follows the dominant solution. Zeros (at ``u = 1`` for ``m != 1``) come
    out as ``-inf``.

    Parameters
    ----------
    lmax : int
    m : int
        ``|m| <= lmax``
    u : np.ndarray
        cosines ``>= 1``

    Returns
    -------
    np.ndarray
        shape ``(lmax - l0 + 1, len(u))``
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(~(u >= 1.0)):
        raise ValueError("Wigner continuation requires u >= 1")
    if lmax < 1 or abs(m) > lmax:
        raise ValueError(f"need 1 <= lmax and |m| <= lmax, got lmax={lmax}, m={m}")
    l0 = max(1, abs(m))
    with np.errstate(divide="ignore"):
        log_c = 0.5 * np.log((u + 1.0) / 2.0)
        log_t = 0.5 * np.log((u - 1.0) / 2.0)
    out = np.empty((lmax - l0 + 1, u.size))
    out[0] = _log_seed(m, log_c, log_t)
    ratio = None
    for l in range(l0, lmax):
        a = l * np.sqrt(((l + 1) ** 2 - m * m) * ((l + 1) ** 2 - 1.0))
        b = (2 * l + 1) * (l * (l + 1) * u - m)
        if ratio is None:
            ratio = b / a
        else:
            cc = (l + 1) * np.sqrt((l * l - m * m) * (l * l - 1.0))
            ratio = (b - cc / ratio) / a
        out[l - l0 + 1] = out[l - l0] + np.log(ratio)
    return out


def wigner_d_column(lmax: int, m: int, angle: HyperbolicAngle) -> ScaledArray:
    r"""Real factors ``d~^l_{m,1}(u)`` for ``l = max(1,|m|)..lmax``.

    ``d^l_{m,1}(theta) = i**(m-1) * d~^l_{m,1}(u)``; see the module notes.
    """
    logs = log_wigner_d_table(lmax, m, [angle.u])[:, 0]
    return ScaledArray(np.where(np.isneginf(logs), 0, 1), logs)


def wigner_d_column_reflected(lmax: int, m: int, angle: HyperbolicAngle) -> ScaledArray:
    r"""Real factors for the reflected angle ``pi - theta``.

    ``d^l_{m,1}(pi - theta) = (-1)**(l+m-1) * i**(m-1) * d~^l_{-m,1}(u)``.
    """
    return wigner_d_column(lmax, -m, angle)
