"""Segmented odd-only sieve of Eratosthenes with pi/theta queries.

Segments cover a fixed grid ``[k*span, (k+1)*span)`` with ``span = 2 *
segment_size``. Per-segment counts and correctly rounded log sums are reduced
in grid order, so pi and theta are bit-identical for any thread count.
"""

import math
import os
import struct
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import isqrt

import numpy as np

from .accumulate import Neumaier, block_sum
from .errors import CapacityError

DEFAULT_LIMIT = 10**10
DEFAULT_SEGMENT_SIZE = 1 << 20  # odd slots per segment
DEFAULT_CACHE_LIMIT = 1 << 27

# presieve wheel over odd slots; pattern index i <-> odd number 2i+1
_WHEEL_PRIMES = (3, 5, 7, 11, 13)
_WHEEL_PERIOD = 3 * 5 * 7 * 11 * 13


def _wheel_pattern(length):
    pat = np.zeros(_WHEEL_PERIOD + length, dtype=np.bool_)
    for p in _WHEEL_PRIMES:
        pat[(p - 1) // 2 :: p] = True
    return pat


def simple_primes(n):
    """All primes <= n from a plain (non-segmented) sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=np.bool_)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


@dataclass(frozen=True)
class PrimeSegment:
    """Sieved block ``[lo, hi)``; ``composite[i]`` describes ``lo + 2i + 1``.

    ``lo`` is even. 2 is never stored; :meth:`primes` adds it when the block
    contains it.
    """

    lo: int
    hi: int
    composite: np.ndarray

    def primes(self):
        odd = self.lo + 1 + 2 * np.flatnonzero(~self.composite).astype(np.int64)
        if self.lo <= 2 < self.hi:
            return np.concatenate(([2], odd)).astype(np.int64)
        return odd

    def count(self):
        n = len(self.composite) - int(np.count_nonzero(self.composite))
        return n + (1 if self.lo <= 2 < self.hi else 0)

    def is_prime(self, n):
        if not self.lo <= n < self.hi:
            raise ValueError(f"{n} outside segment [{self.lo}, {self.hi})")
        if n == 2:
            return True
        if n % 2 == 0:
            return False
        return not self.composite[(n - self.lo - 1) // 2]


@dataclass(frozen=True)
class SieveStats:
    limit: int
    pi: int
    theta: float
    theta_comp: float = 0.0

    @property
    def chebyshev_ok(self):
        return self.theta <= math.log(4) * self.limit


class Sieve:
    """Prime source up to ``limit`` (inclusive).

    Primes below ``cache_limit`` are kept in memory after first use; anything
    above is streamed segment by segment.
    """

    def __init__(
        self,
        limit=DEFAULT_LIMIT,
        segment_size=DEFAULT_SEGMENT_SIZE,
        threads=1,
        cache_limit=DEFAULT_CACHE_LIMIT,
    ):
        if limit < 2:
            raise ValueError("limit must be at least 2")
        if segment_size < 16:
            raise ValueError("segment_size too small")
        self.limit = int(limit)
        self.segment_size = int(segment_size)
        self.span = 2 * self.segment_size
        self.threads = max(1, int(threads))
        self.cache_limit = min(int(cache_limit), self.limit + 1)
        self._base = simple_primes(isqrt(self.limit) + 1)[1:]  # odd base primes
        self._base_sq = self._base * self._base
        self._wheel = _wheel_pattern(self.segment_size)
        self._lock = threading.Lock()
        # cache of whole grid segments: primes, per-segment counts and log sums
        self._cache_chunks = []
        self._cache_hi = 0
        self._seg_counts = []
        self._seg_theta = []
        self._prefix_pi = [0]
        self._prefix_theta = [Neumaier()]
        self._primes = np.zeros(0, dtype=np.int64)

    # -- raw segments ---------------------------------------------------

    def _check(self, hi):
        if hi > self.limit + 1:
            raise CapacityError(
                f"range end {hi} exceeds sieve limit {self.limit}", required=hi - 1
            )

    def segment(self, lo, hi):
        """Sieve ``[lo, hi)``; ``lo`` must be even."""
        if lo % 2:
            raise ValueError("segment start must be even")
        if not lo < hi:
            raise ValueError("empty segment")
        self._check(hi)
        nslots = (hi - lo) // 2
        if nslots > self.segment_size:
            raise ValueError("segment longer than configured segment_size")
        off = (lo // 2) % _WHEEL_PERIOD
        flags = self._wheel[off : off + nslots].copy()
        if lo == 0:
            flags[0] = True  # 1
            for p in _WHEEL_PRIMES:
                if p < hi:
                    flags[(p - 1) // 2] = False
        top = int(np.searchsorted(self._base_sq, hi, side="left"))
        for p in self._base[: top].tolist():
            if p <= 13:
                continue
            m = -(-(lo + 1) // p) * p
            if m % 2 == 0:
                m += p
            if m < p * p:
                m = p * p
            flags[(m - lo - 1) // 2 :: p] = True
        return PrimeSegment(lo, hi, flags)

    def _grid(self, lo, hi):
        """Grid-aligned pieces covering ``[lo, hi)``."""
        start = (lo // self.span) * self.span
        out = []
        a = start
        while a < hi:
            b = min(a + self.span, hi, self.limit + 1)
            out.append((a, b))
            a += self.span
        return out

    def _map(self, fn, items):
        if self.threads == 1 or len(items) < 2:
            return map(fn, items)
        pool = ThreadPoolExecutor(self.threads)
        try:
            # executor.map preserves input order, so reductions stay ordered
            return list(pool.map(fn, items))
        finally:
            pool.shutdown()

    def segments(self, lo, hi):
        """Yield :class:`PrimeSegment` objects covering ``[lo, hi)`` in order."""
        self._check(hi)
        pieces = self._grid(lo, hi)
        batch = max(1, self.threads * 2)
        for i in range(0, len(pieces), batch):
            chunk = pieces[i : i + batch]
            yield from self._map(lambda ab: self.segment(*ab), chunk)

    # -- cache ----------------------------------------------------------

    def _segment_summary(self, ab):
        seg = self.segment(*ab)
        primes = seg.primes()
        return primes, len(primes), block_sum(np.log(primes))

    def _extend_cache(self, hi):
        hi = min(hi, self.cache_limit)
        if hi <= self._cache_hi:
            return
        with self._lock:
            if hi <= self._cache_hi:
                return
            target = min(-(-hi // self.span) * self.span, self.limit + 1)
            pieces = self._grid(self._cache_hi, target)
            for primes, n, th in self._map(self._segment_summary, pieces):
                self._cache_chunks.append(primes)
                self._seg_counts.append(n)
                self._seg_theta.append(th)
                self._prefix_pi.append(self._prefix_pi[-1] + n)
                acc = self._prefix_theta[-1].copy()
                acc.add(th)
                self._prefix_theta.append(acc)
            self._cache_hi = pieces[-1][1]
            self._primes = np.concatenate(self._cache_chunks)
            self._cache_chunks = [self._primes]

    def cached_primes(self, hi):
        """Array of all primes < ``hi`` (``hi`` within the cache limit)."""
        if hi > self.cache_limit:
            raise CapacityError(f"{hi} above cache limit {self.cache_limit}", required=hi)
        self._check(hi)
        self._extend_cache(hi)
        return self._primes[: int(np.searchsorted(self._primes, hi, side="left"))]

    # -- queries ----------------------------------------------------------

    def primes_array(self, lo, hi):
        """Primes in ``[lo, hi)`` as an int64 array."""
        if not lo < hi:
            raise ValueError("need lo < hi")
        self._check(hi)
        if hi <= self.cache_limit:
            p = self.cached_primes(hi)
            return p[int(np.searchsorted(p, lo, side="left")) :]
        return np.concatenate(list(self.prime_chunks(lo, hi)) or [np.zeros(0, np.int64)])

    def prime_chunks(self, lo, hi):
        """Yield ascending arrays whose concatenation is the primes in ``[lo, hi)``."""
        self._check(hi)
        lo = max(lo, 0)
        if lo >= hi:
            return
        if lo < self.cache_limit:
            top = min(hi, self.cache_limit)
            p = self.cached_primes(top)
            p = p[int(np.searchsorted(p, lo, side="left")) :]
            step = self.segment_size
            for i in range(0, len(p), step):
                yield p[i : i + step]
            lo = top
        if lo >= hi:
            return
        for seg in self.segments(lo, hi):
            p = seg.primes()
            yield p[(p >= lo) & (p < hi)]

    def primes_in(self, lo, hi):
        """Stream the primes in ``[lo, hi)`` one by one."""
        for chunk in self.prime_chunks(lo, hi):
            yield from chunk.tolist()

    def _state_at(self, x):
        """(pi, theta accumulator) for primes <= x, using the grid reduction."""
        x = int(x)
        if x < 2:
            return 0, Neumaier()
        self._check(x + 1)
        self._extend_cache(x + 1)
        k = x // self.span
        kc = min(k, len(self._seg_counts))
        n = self._prefix_pi[kc]
        acc = self._prefix_theta[kc].copy()
        pieces = [(a * self.span, (a + 1) * self.span) for a in range(kc, k)]
        for _, cnt, th in self._map(self._segment_summary, pieces):
            n += cnt
            acc.add(th)
        part = self._segment_primes(k)
        part = part[part <= x]
        acc.add(block_sum(np.log(part)))
        return n + len(part), acc

    def _segment_primes(self, k):
        if k < len(self._seg_counts):
            return self._primes[self._prefix_pi[k] : self._prefix_pi[k + 1]]
        lo = k * self.span
        return self.segment(lo, min(lo + self.span, self.limit + 1)).primes()

    def pi(self, x):
        if x < 2:
            return 0
        x = int(x)
        self._check(x + 1)
        if x < self.cache_limit:
            self._extend_cache(x + 1)
            return int(np.searchsorted(self._primes, x, side="right"))
        self._extend_cache(self.cache_limit)
        k = x // self.span
        kc = min(k, len(self._seg_counts))
        n = self._prefix_pi[kc]
        pieces = [(a * self.span, (a + 1) * self.span) for a in range(kc, k)]
        n += sum(self._map(lambda ab: self.segment(*ab).count(), pieces))
        part = self._segment_primes(k)
        return n + int(np.count_nonzero(part <= x))

    def pi_many(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        if xs.size == 0:
            return xs.copy()
        top = int(xs.max())
        if top < self.cache_limit:
            self._check(top + 1)
            self._extend_cache(top + 1)
            return np.searchsorted(self._primes, xs, side="right").astype(np.int64)
        return np.array([self.pi(int(x)) for x in xs], dtype=np.int64)

    def count_interval(self, x, y):
        """Number of primes in ``(x, y]``."""
        if x > y:
            raise ValueError(f"count_interval needs x <= y, got ({x}, {y})")
        if x == y:
            return 0
        return self.pi(y) - self.pi(x)

    def theta(self, x):
        """Chebyshev theta, sum of log p over p <= x, compensated."""
        return self._state_at(x)[1].value

    def theta_many(self, xs):
        """theta at each point of ``xs``; same arithmetic as :meth:`theta`."""
        return np.array([self.theta(int(x)) for x in xs], dtype=np.float64)

    def stats(self, x):
        n, acc = self._state_at(x)
        return SieveStats(int(x), n, acc.value, acc.comp)


# -- checkpoint files -----------------------------------------------------

_MAGIC = b"PGL1"
_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")  # magic, version, record count, segment size
_RECORD = struct.Struct("<QQdd")  # limit, pi, theta, theta compensation


def write_checkpoints(path, stats, segment_size=DEFAULT_SEGMENT_SIZE):
    """Write (limit, pi, theta) records to a little-endian ``PGL1`` file."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, len(stats), segment_size))
        for s in stats:
            fh.write(_RECORD.pack(s.limit, s.pi, s.theta, s.theta_comp))


def read_checkpoints(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise ValueError("truncated checkpoint header")
    magic, version, n, segment_size = _HEADER.unpack_from(data, 0)
    if magic != _MAGIC:
        raise ValueError(f"bad checkpoint magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    if len(data) != _HEADER.size + n * _RECORD.size:
        raise ValueError("checkpoint length does not match record count")
    out = []
    for i in range(n):
        limit, pi, theta, comp = _RECORD.unpack_from(data, _HEADER.size + i * _RECORD.size)
        out.append(SieveStats(limit, pi, theta, comp))
    return out, segment_size


def decade_checkpoints(sieve, max_exponent):
    """Stats at 10, 100, ..., 10**max_exponent."""
    return [sieve.stats(10**k) for k in range(1, max_exponent + 1)]


def cache_dir():
    d = os.environ.get("PGL_CACHE_DIR")
    if d:
        os.makedirs(d, exist_ok=True)
    return d


_default = None
_default_lock = threading.Lock()


def default_sieve():
    """Process-wide shared sieve with the default limit."""
    global _default
    with _default_lock:
        if _default is None:
            _default = Sieve()
        return _default


def set_default_sieve(sieve):
    global _default
    with _default_lock:
        _default = sieve
