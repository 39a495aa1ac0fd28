"""Exact rational polynomials f_j and the expansion they generate.

    f_0 = 1,   f_{j+1}(x) = f_j(x) - x sum_{k=0}^{j} C(j, k) f_{j-k}(x) / (k + 2)

With y = (1 - lam) log p and x = s log p they satisfy

    p^(s+1-lam) / exp(s (p^(1-lam) - 1) / (1-lam)) = sum_j y^j f_j(x) / j!
"""

import cmath
import math
import os
import threading
from fractions import Fraction
from functools import reduce
from pathlib import Path

from .errors import CapacityError

MAX_ORDER = 64


class RationalPolynomial:
    """Polynomial with Fraction coefficients, index = degree."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        c = [Fraction(v) for v in coefficients]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coefficients = tuple(c) if c else (Fraction(0),)

    @property
    def degree(self):
        if len(self.coefficients) == 1 and self.coefficients[0] == 0:
            return -1
        return len(self.coefficients) - 1

    def __eq__(self, other):
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"RationalPolynomial({format_coefficients(self)})"

    def __call__(self, x):
        return eval_poly(self, x)


def eval_poly(poly, x):
    """Horner evaluation with coefficients rounded to float."""
    acc = 0.0
    for c in reversed(poly.coefficients):
        acc = acc * x + float(c)
    return acc


def _fmt(c):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_coefficients(poly):
    return " ".join(_fmt(c) for c in poly.coefficients)


class _Family:
    """Memo table for f_j; writes serialised by a lock."""

    def __init__(self, max_order=MAX_ORDER):
        self.max_order = max_order
        self._lock = threading.Lock()
        self._polys = [(Fraction(1),)]
        self._pascal = [[1]]

    def _binom_row(self, j):
        while len(self._pascal) <= j:
            prev = self._pascal[-1]
            self._pascal.append([1] + [a + b for a, b in zip(prev, prev[1:])] + [1])
        return self._pascal[j]

    def get(self, j):
        if j < 0:
            raise ValueError(f"order must be nonnegative, got {j}")
        if j > self.max_order:
            raise CapacityError(f"order {j} above the configured max {self.max_order}", required=j)
        polys = self._polys
        if j < len(polys):
            return RationalPolynomial(polys[j])
        with self._lock:
            while len(self._polys) <= j:
                n = len(self._polys) - 1  # build f_{n+1}
                row = self._binom_row(n)
                corr = [Fraction(0)] * (n + 1)
                for k in range(n + 1):
                    scale = Fraction(row[k], k + 2)
                    for d, c in enumerate(self._polys[n - k]):
                        corr[d] += scale * c
                nxt = list(self._polys[n]) + [Fraction(0)]
                for d, c in enumerate(corr):
                    nxt[d + 1] -= c
                self._polys.append(tuple(nxt))
        return RationalPolynomial(self._polys[j])


_family = _Family()


def f_poly(j):
    """The j-th polynomial of the family, exact and memoised."""
    return _family.get(j)


def set_max_order(n):
    global _family
    _family = _Family(n)


# -- expansion ------------------------------------------------------------------


def expansion_lhs(p, s, lam):
    """p^(s+1-lam) / exp(s (p^(1-lam) - 1)/(1-lam)), formed in log space."""
    a = 1.0 - lam
    lp = math.log(p)
    return cmath.exp((s + a) * lp - s * math.expm1(a * lp) / a)


def expansion_series(p, s, lam, J):
    a = 1.0 - lam
    lp = math.log(p)
    y = a * lp
    x = complex(s) * lp
    total = 0.0j
    yj = 1.0
    for j in range(J + 1):
        total += yj * eval_poly(f_poly(j), x)
        yj *= y / (j + 1)
    return total


def expansion_check(p, s, lam, J):
    """|LHS - sum_{j<=J} (1-lam)^j log(p)^j f_j(s log p) / j!|."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    s = complex(s)
    if s.real < 0:
        raise ValueError("needs Re(s) >= 0")
    return abs(expansion_lhs(p, s, lam) - expansion_series(p, s, lam, J))


def expansion_check_opposite_sign(p, s, lam, J):
    """Same residual with (lam - 1)^j in place of (1 - lam)^j."""
    a = 1.0 - lam
    lp = math.log(p)
    x = complex(s) * lp
    total = 0.0j
    yj = 1.0
    for j in range(J + 1):
        total += yj * eval_poly(f_poly(j), x)
        yj *= -a * lp / (j + 1)
    return abs(expansion_lhs(p, s, lam) - total)


# -- text dump and probes -----------------------------------------------------


def dumps(max_j):
    return "".join(f"{j}: {format_coefficients(f_poly(j))}\n" for j in range(max_j + 1))


def loads(text):
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        head, _, body = line.partition(":")
        out[int(head)] = RationalPolynomial(Fraction(t) for t in body.split())
    return out


def cache_path():
    root = os.environ.get("PGL_CACHE_DIR")
    return Path(root) / "taylor_polys.txt" if root else None


def save_cache(max_j, path=None):
    path = Path(path) if path else cache_path()
    if path is None:
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(dumps(max_j))
    tmp.replace(path)
    return path


def load_cache(path=None):
    """Read a dump and check it against the recursion before trusting it."""
    path = Path(path) if path else cache_path()
    if path is None or not path.exists():
        return {}
    polys = loads(path.read_text())
    for j, poly in polys.items():
        if poly != f_poly(j):
            raise ValueError(f"cached f_{j} disagrees with the recursion")
    return polys


def denominator_lcm(j):
    """lcm of the coefficient denominators of f_j."""
    return reduce(math.lcm, (c.denominator for c in f_poly(j).coefficients), 1)


def denominator_profile(max_j):
    """(j, lcm of denominators, lcm(2..j+2)) for each j; recorded, not asserted."""
    out = []
    for j in range(max_j + 1):
        out.append((j, denominator_lcm(j), reduce(math.lcm, range(2, j + 3), 1)))
    return out
