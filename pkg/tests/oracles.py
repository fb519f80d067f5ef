"""Independent reference implementations used only by the tests.

Everything here runs in mpmath extended precision and shares no code with
the package.
"""
from fractions import Fraction
from math import comb, factorial

import mpmath as mp

DPS = 60


def bessel_i_series(nu, x, dps=DPS):
    """Ascending power series of I_nu(x)."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        nu = mp.mpf(nu)
        half = x / 2
        term = half**nu / mp.gamma(nu + 1)
        total = term
        k = 0
        while True:
            k += 1
            term *= half * half / (k * (k + nu))
            total += term
            if abs(term) < abs(total) * mp.mpf(10) ** (-dps + 5) and k > x:
                break
        return total


def bessel_k_closed(n, x, dps=DPS):
    """Exact finite sum for K_{n+1/2}(x)."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        s = sum(
            mp.factorial(n + k) / (mp.factorial(k) * mp.factorial(n - k) * (2 * x) ** k)
            for k in range(n + 1)
        )
        return mp.sqrt(mp.pi / (2 * x)) * mp.exp(-x) * s


def mie_oracle(l, x, dps=DPS):
    """Unscaled perfect-mirror Mie coefficients (a_l, b_l) at imaginary frequency."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        ip = mp.besseli(l + mp.mpf(1) / 2, x)
        im = mp.besseli(l - mp.mpf(1) / 2, x)
        kp = mp.besselk(l + mp.mpf(1) / 2, x)
        km = mp.besselk(l - mp.mpf(1) / 2, x)
        pref = mp.pi / 2 * (-1) ** (l + 1)
        a = pref * (l * ip - x * im) / (l * kp + x * km)
        b = pref * ip / kp
        return a, b


def _wigner_norm(l, m):
    return mp.sqrt(
        mp.factorial(l + m) * mp.factorial(l - m) * mp.factorial(l + 1) * mp.factorial(l - 1)
    )


def _wigner_terms(l, m):
    """(rational coefficient, cos power, sin power) of the Edmonds sum for
    d^l_{m,1}, without the common square-root normalisation."""
    out = []
    for s in range(0, l + 3):
        f = (l + 1 - s, s, m - 1 + s, l - m - s)
        if min(f) < 0:
            continue
        den = factorial(f[0]) * factorial(f[1]) * factorial(f[2]) * factorial(f[3])
        out.append((Fraction((-1) ** (m - 1 + s), den), 2 * l + 1 - m - 2 * s, m - 1 + 2 * s))
    return out


def wigner_d(l, m, theta, dps=DPS):
    """d^l_{m,1}(theta) from the factorial sum, complex theta allowed."""
    with mp.workdps(dps):
        c, s = mp.cos(theta / 2), mp.sin(theta / 2)
        total = sum(
            mp.mpf(q.numerator) / q.denominator * c**pc * s**ps
            for q, pc, ps in _wigner_terms(l, m)
        )
        return _wigner_norm(l, m) * total


def imaginary_angle(u, dps=DPS):
    """theta with cos(theta) = u >= 1 and sin(theta) = -i sqrt(u^2 - 1)."""
    with mp.workdps(dps):
        return -1j * mp.acosh(mp.mpf(u))


def wigner_real_factor(l, m, u, reflected=False, dps=DPS):
    """Real factor defined by d = i^(m-1) * factor, or for pi - theta
    d = (-1)^(l+m-1) i^(m-1) * factor. Returns (real part, |imag part|)."""
    with mp.workdps(dps):
        th = imaginary_angle(u, dps)
        if reflected:
            val = wigner_d(l, m, mp.pi - th, dps) / ((-1) ** (l + m - 1) * mp.mpc(0, 1) ** (m - 1))
        else:
            val = wigner_d(l, m, th, dps) / mp.mpc(0, 1) ** (m - 1)
        return mp.re(val), abs(mp.im(val))


def _product_poly(l1, l2, m, reflected):
    """Exact rational coefficients (in u) of d^l1_{m,1} d^l2_{m,1} without
    normalisation, using cos^2(θ/2) = (1+u)/2 and sin^2(θ/2) = (1-u)/2; all
    powers in the product are even, so no branch choice enters."""
    poly = {}
    for q1, pc1, ps1 in _wigner_terms(l1, m):
        for q2, pc2, ps2 in _wigner_terms(l2, m):
            pc, ps = pc1 + pc2, ps1 + ps2
            if reflected:
                pc, ps = ps, pc
            assert pc % 2 == 0 and ps % 2 == 0
            a, b = pc // 2, ps // 2
            scale = q1 * q2 / 2 ** (a + b)
            for i in range(a + 1):
                for j in range(b + 1):
                    poly[i + j] = poly.get(i + j, 0) + scale * comb(a, i) * comb(b, j) * (-1) ** j
    return poly


def _laplace_moment(k, beta):
    """int_1^inf u^k e^{-beta u} du."""
    return mp.exp(-beta) * sum(
        mp.factorial(k) / mp.factorial(k - j) / beta ** (j + 1) for j in range(k + 1)
    )


def overlap_exact(l1, l2, m, xi, eps, dps=DPS):
    """Scaled overlaps (F+ e^{2 xi}, F- e^{2 xi}) from the literal integral
    with the d-functions expanded as polynomials in u and integrated exactly."""
    with mp.workdps(dps):
        xi, eps = mp.mpf(xi), mp.mpf(eps)
        beta = 2 * xi * (1 + eps)
        parts = []
        for reflected in (False, True):
            poly = _product_poly(l1, l2, m, reflected)
            total = mp.mpf(0)
            for k, coef in poly.items():
                if coef:
                    total += mp.mpf(coef.numerator) / coef.denominator * _laplace_moment(k, beta)
            parts.append(total * _wigner_norm(l1, m) * _wigner_norm(l2, m))
        direct, refl = parts
        pref = (-1) ** (l2 + m) * mp.exp(2 * xi)
        sign = (-1) ** (l1 - l2)
        return pref * (direct + sign * refl), pref * (direct - sign * refl)
