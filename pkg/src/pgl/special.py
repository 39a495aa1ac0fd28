"""Complex Gamma and exponential integral E1 = Gamma(0, s)."""

import cmath
import math

from .errors import DomainError, NumericError

# Lanczos coefficients for g = 607/128, 15 terms (Godfrey)
_LANCZOS_G = 607.0 / 128.0
_LANCZOS = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
EULER_GAMMA = 0.57721566490153286061


def _is_pole(z):
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def log_gamma_complex(z):
    """Log Gamma for Re(z) >= 0.5 (principal branch of the Lanczos form)."""
    z = complex(z) - 1.0
    a = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        a += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(a)


def gamma_complex(z):
    z = complex(z)
    if _is_pole(z):
        raise DomainError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        # reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        return math.pi / (cmath.sin(math.pi * z) * gamma_complex(1.0 - z))
    return cmath.exp(log_gamma_complex(z))


def _e1_series(s):
    total = 0.0j
    term = 1.0 + 0.0j
    for k in range(1, 400):
        term *= -s / k
        inc = term / k
        total += inc
        if abs(inc) <= 1e-17 * abs(total):
            break
    return -EULER_GAMMA - cmath.log(s) - total


def _e1_continued_fraction(s, max_iter=20000):
    # modified Lentz on E1(s) = e^-s / (s + 1 - 1/(s + 3 - 4/(s + 5 - ...)))
    tiny = 1e-300
    b = s + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * cmath.exp(-s)
    raise NumericError("E1 continued fraction did not converge", {"s": s})


def exp_integral_E1(s, series_radius=2.0):
    """E1(s) = Gamma(0, s) = int_s^inf e^-t / t dt for Re(s) > 0.

    Power series inside ``|s| <= series_radius``, continued fraction outside.
    """
    s = complex(s)
    if not s.real > 0.0:
        raise DomainError(f"E1 needs Re(s) > 0, got {s}")
    if abs(s) <= series_radius:
        return _e1_series(s)
    return _e1_continued_fraction(s)
