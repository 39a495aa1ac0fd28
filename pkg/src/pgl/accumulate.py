"""Compensated accumulation for long streaming sums."""

import math

import numpy as np


class Neumaier:
    """Running sum with an error-feedback term (Neumaier's variant of Kahan).

    Blocks are usually reduced with :func:`math.fsum` first and the block
    results fed here in a fixed order, which keeps totals bit-identical no
    matter how the blocks were produced.
    """

    __slots__ = ("total", "comp")

    def __init__(self, total=0.0, comp=0.0):
        self.total = float(total)
        self.comp = float(comp)

    def add(self, x):
        x = float(x)
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    def extend(self, values):
        for v in values:
            self.add(v)

    @property
    def value(self):
        return self.total + self.comp

    def copy(self):
        return Neumaier(self.total, self.comp)

    def __repr__(self):
        return f"Neumaier({self.total!r}, {self.comp!r})"


def block_sum(values):
    """Correctly rounded sum of a 1-d float array."""
    return math.fsum(np.asarray(values, dtype=np.float64).tolist())


def complex_block_sum(values):
    values = np.asarray(values, dtype=np.complex128)
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


class ComplexNeumaier:
    __slots__ = ("re", "im")

    def __init__(self):
        self.re = Neumaier()
        self.im = Neumaier()

    def add(self, z):
        self.re.add(z.real)
        self.im.add(z.imag)

    @property
    def value(self):
        return complex(self.re.value, self.im.value)
