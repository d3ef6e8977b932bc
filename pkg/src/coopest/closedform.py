"""Analytic results for the phase damping family with a uniform prior on [0, pi/2].

Used as an independent oracle for the numerical pipeline.  ``cb_min`` is the
exact minimum cost on ``B``.  ``cb_min_alt`` is a second rational form that
agrees with it only at ``gamma`` in {0, 1}; it is kept so the gap can be
measured.
"""
import numpy as np

__all__ = [
    "cb_min",
    "cb_min_alt",
    "cf_min",
    "pe",
    "gamma0",
    "gamma_star",
    "gamma_star_coefficients",
    "coop_min_at_zero",
    "sb_opt",
]

PI = np.pi


def _check(gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(~np.isfinite(g)) or np.any(g < 0.0) or np.any(g > 1.0):
        raise ValueError("gamma must lie in [0, 1]")
    return g


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def cb_min(gamma):
    """Minimum cost on ``B``: ``pi^2/48 - gamma(1-gamma)(pi-4)^2/(pi^2-4)``."""
    g = _check(gamma)
    return _out(PI ** 2 / 48 - g * (1 - g) * (PI - 4) ** 2 / (PI ** 2 - 4))


def cb_min_alt(gamma):
    """``[pi^2(pi+2) - 48 gamma(1-gamma)(pi-2)] / (48(pi+2))``.

    Differs from :func:`cb_min` by a factor ``(pi-2)^2`` in place of
    ``(pi-4)^2`` in the ``gamma(1-gamma)`` term; exact only at the endpoints.
    """
    g = _check(gamma)
    return _out((PI ** 2 * (PI + 2) - 48 * g * (1 - g) * (PI - 2)) / (48 * (PI + 2)))


def cf_min(gamma):
    """Minimum cost on the environment output ``F``."""
    g = _check(gamma)
    num = (48 * PI ** 2 + 4 * PI ** 4 - 192 * (1 - g) ** 2) * (1 - g) - PI ** 6 * (1 + g)
    den = 48 * PI ** 2 * (4 - PI ** 2 - 4 * g - PI ** 2 * g)
    return _out(num / den)


def _pe_poly(g):
    q2 = PI ** 6 - 8 * PI ** 5 + 20 * PI ** 4 - 32 * PI ** 3 + 68 * PI ** 2 - 16
    q1 = PI ** 6 - 8 * PI ** 5 + 12 * PI ** 4 + 32 * PI ** 3 - 72 * PI ** 2 + 32
    q0 = PI ** 4 - 8 * PI ** 2 + 16
    pref = (1 - g) / (PI ** 2 * (PI ** 2 - 4) * (PI ** 2 * g + 4 * g + PI ** 2 - 4))
    return pref * (q2 * g ** 2 + q1 * g - q0)


def pe(gamma):
    """Privacy ``max{cf_min - cb_min, 0}`` as a single rational expression."""
    g = _check(gamma)
    return _out(np.maximum(_pe_poly(g), 0.0))


def gamma0():
    """Root of the privacy in (0, 1): privacy is positive on ``(gamma0, 1)``."""
    num = PI * np.sqrt(PI ** 2 * (PI ** 2 - 8 * PI + 20) * (PI - 4) ** 2 + 16) - (PI - 4) ** 2 * PI ** 2 + 8
    den = 2 * PI ** 2 * (PI ** 4 - 8 * PI ** 3 + 20 * PI ** 2 - 32 * PI + 68) - 32
    return float((PI ** 2 - 4) * num / den)


def gamma_star_coefficients():
    """``(a, b, c, d, theta)`` of the cubic whose root maximises the privacy."""
    a = 2 * (PI ** 2 + 4) * (-16 + 68 * PI ** 2 - 32 * PI ** 3 + 20 * PI ** 4 - 8 * PI ** 5 + PI ** 6)
    b = 384 - 1376 * PI ** 2 + 640 * PI ** 3 - 208 * PI ** 4 + 64 * PI ** 5 + 40 * PI ** 6 - 24 * PI ** 7 + 3 * PI ** 8
    c = 8 * (PI ** 2 - 4) * (12 - 35 * PI ** 2 + 16 * PI ** 3 - 2 * PI ** 4)
    d = (PI ** 2 - 4) ** 2 * (8 - 18 * PI ** 2 + 8 * PI ** 3 - PI ** 4)
    p = 27 * a ** 2 * d - 9 * a * b * c + 2 * b ** 3
    rad = p ** 2 - 4 * (b ** 2 - 3 * a * c) ** 3
    if rad < 0:
        raise ArithmeticError("negative discriminant; no real cube-root branch")
    # real branch of the cube root, also for a negative argument
    theta = np.cbrt(np.sqrt(rad) - p)
    return float(a), float(b), float(c), float(d), float(theta)


def gamma_star():
    """Probe weight maximising the privacy."""
    a, b, c, _, th = gamma_star_coefficients()
    r3 = 2.0 ** (1 / 3)
    return float((th ** 2 - r3 * b * th + r3 ** 2 * (b ** 2 - 3 * a * c)) / (r3 * 3 * a * th))


def coop_min_at_zero():
    """Cooperative minimum cost at ``gamma = 0``: ``(pi^4 - 48)/(48 pi^2)``."""
    return float((PI ** 4 - 48) / (48 * PI ** 2))


def sb_opt(gamma):
    """Optimal estimator on ``B`` for probe ``(gamma, phi=0)``."""
    g = float(_check(gamma))
    off = 4 * PI * (PI - 4) * np.sqrt((1 - g) * g)
    m = np.array([
        [32 + PI ** 3 - 12 * PI - (32 - 8 * PI) * g, off],
        [off, PI ** 3 - 4 * PI + (32 - 8 * PI) * g],
    ])
    return (m / (4 * (PI ** 2 - 4))).astype(complex)
