"""Enumerative indexing of bounded, sum-constrained checkerboard points.

The shaping alphabet used throughout this package is

    TD(n, H, 2L)   = { d in {0..H}^n : sum(d) even, sum(d) <= 2L },
    TD(n, H, 2L, M) = the M points of TD(n, H, 2L) that come first in
                      canonical order (ell-1 norm ascending, ties broken
                      lexicographically).

Because the point counts at the sizes we care about exceed 2**100, every
count in this module is an exact Python integer and rank/unrank work on
arbitrary-precision indices.  The core object is a dynamic-programming
table N[m][s] = number of m-tuples over {0..H} summing to s; everything
else (cardinalities, rank/unrank, first-coordinate marginals, selection
statistics) is derived from it.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "TdParams",
    "TdIndexer",
    "TdSelection",
    "TdSampler",
    "count_td",
    "index_to_point",
    "point_to_index",
    "l1_stats",
]


@dataclass(frozen=True)
class TdParams:
    """Geometry of one shaping alphabet: n, box height h, half-sum bound l,
    and the number of points actually used (the m_s least-l1 ones)."""

    n: int
    h: int
    l: int
    m_s: int

    def indexer(self) -> "TdIndexer":
        return TdIndexer(self.n, self.h, self.l)


@lru_cache(maxsize=64)
def _composition_table(n: int, h: int) -> tuple[tuple[int, ...], ...]:
    """Table N[m][s]: number of vectors in {0..h}^m with coordinate sum s.

    Uses the prefix-sum recurrence
        N[m][s] = N[m][s-1] + N[m-1][s] - N[m-1][s-h-1]
    so the whole table costs O(n * n*h) exact-integer additions.
    """
    smax = n * h
    rows: list[tuple[int, ...]] = []
    prev = [1] + [0] * smax
    rows.append(tuple(prev))
    for _ in range(1, n + 1):
        cur = [0] * (smax + 1)
        cur[0] = prev[0]
        for s in range(1, smax + 1):
            val = cur[s - 1] + prev[s]
            if s - h - 1 >= 0:
                val -= prev[s - h - 1]
            cur[s] = val
        rows.append(tuple(cur))
        prev = cur
    return tuple(rows)


class TdIndexer:
    """Rank/unrank machinery for TD(n, H, 2L) in canonical order.

    Canonical order sorts points by ell-1 norm (coordinate sum) first and
    lexicographically within a shell.  Index 0 is always the origin.
    """

    def __init__(self, n: int, h: int, l: int):
        if n < 1 or h < 0 or l < 0:
            raise ValueError("need n >= 1, h >= 0, l >= 0")
        self.n = n
        self.h = h
        self.l = l
        self.smax = min(2 * l, n * h)
        # Largest even coordinate sum actually admissible.
        if self.smax % 2 == 1:
            self.smax -= 1
        self._table = _composition_table(n, h)
        shells = []
        cum = []
        total = 0
        for s in range(0, self.smax + 1, 2):
            c = self._table[n][s]
            shells.append(c)
            total += c
            cum.append(total)
        self.shell_sizes = shells          # per even shell s = 0, 2, 4, ...
        self.shell_cum = cum               # cumulative counts, same order
        self.count = total
        self._cum_cache: dict[tuple[int, int], list[int]] = {}

    # -- counting helpers -------------------------------------------------

    def _sub_count(self, m: int, s: int) -> int:
        """Number of vectors in {0..h}^m with sum exactly s (0 if out of range)."""
        if s < 0 or s > m * self.h:
            return 0
        return self._table[m][s]

    def _cum_blocks(self, m: int, s: int) -> list[int]:
        """Cumulative block sizes over the current coordinate value v = 0, 1, ...

        Entry v holds the number of vectors in {0..h}^(m+1) with sum s whose
        first coordinate is <= v.  Cached because rank/unrank revisit the same
        (m, s) states constantly.
        """
        row = self._cum_cache.get((m, s))
        if row is None:
            acc = 0
            row = []
            for v in range(min(self.h, s) + 1):
                acc += self._sub_count(m, s - v)
                row.append(acc)
            self._cum_cache[(m, s)] = row
        return row

    def shell_of(self, index: int) -> tuple[int, int]:
        """Return (shell sum s, rank inside the shell) for a global index."""
        if not 0 <= index < self.count:
            raise IndexError(f"index {index} out of range for {self.count} points")
        k = bisect.bisect_right(self.shell_cum, index)
        s = 2 * k
        before = self.shell_cum[k - 1] if k > 0 else 0
        return s, index - before

    # -- rank / unrank ----------------------------------------------------

    def unrank(self, index: int) -> np.ndarray:
        s, r = self.shell_of(index)
        out = np.empty(self.n, dtype=np.int64)
        for j in range(self.n):
            row = self._cum_blocks(self.n - 1 - j, s)
            v = bisect.bisect_right(row, r)
            if v:
                r -= row[v - 1]
            out[j] = v
            s -= v
        return out

    def rank(self, point) -> int:
        pt = np.asarray(point, dtype=np.int64)
        if pt.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} point")
        if (pt < 0).any() or (pt > self.h).any():
            raise ValueError("coordinate out of range")
        s = int(pt.sum())
        if s % 2 == 1 or s > 2 * self.l:
            raise ValueError("point outside the indexed set")
        k = s // 2
        r = self.shell_cum[k - 1] if k > 0 else 0
        rem = s
        for j in range(self.n):
            v = int(pt[j])
            if v:
                r += self._cum_blocks(self.n - 1 - j, rem)[v - 1]
            rem -= v
        return r

    # -- statistics over a canonical prefix (the selected alphabet) -------

    def selection(self, m_s: int) -> "TdSelection":
        """Exact statistics of the first ``m_s`` points in canonical order."""
        if not 1 <= m_s <= self.count:
            raise ValueError(f"selection size must be in [1, {self.count}]")
        k = bisect.bisect_left(self.shell_cum, m_s)
        s_star = 2 * k
        before = self.shell_cum[k - 1] if k > 0 else 0
        partial = m_s - before      # points taken from the boundary shell
        full_shells = k             # shells 0, 2, ..., s_star - 2 are complete

        sum_l1 = 0
        for i in range(full_shells):
            sum_l1 += (2 * i) * self.shell_sizes[i]
        sum_l1 += s_star * partial

        # First-coordinate marginal: complete shells contribute the full
        # (n-1)-dimensional counts; the boundary shell is a lexicographic
        # prefix, so coordinate values fill from 0 upward.
        marg = [0] * (self.h + 1)
        for v in range(self.h + 1):
            acc = 0
            for i in range(full_shells):
                acc += self._sub_count(self.n - 1, 2 * i - v)
            marg[v] = acc
        rem = partial
        vpart = -1
        for v in range(self.h + 1):
            if rem == 0:
                break
            block = self._sub_count(self.n - 1, s_star - v)
            take = min(rem, block)
            marg[v] += take
            rem -= take
            if take and rem == 0 and take < block:
                vpart = v
        max_rest = self._max_rest(s_star, partial, full_shells)
        return TdSelection(
            indexer=self,
            m_s=m_s,
            s_star=s_star,
            partial=partial,
            sum_l1=sum_l1,
            first_coord_counts=tuple(marg),
            max_rest_coord=max_rest,
            _partial_v=vpart,
        )

    def _prefix_max_coord(self, m: int, s: int, r: int) -> int:
        """Max coordinate among the first r lex-ordered vectors of {0..h}^m, sum s."""
        if r >= self._sub_count(m, s):
            return min(self.h, s)
        best = 0
        for v in range(0, min(self.h, s) + 1):
            if r == 0:
                break
            block = self._sub_count(m - 1, s - v)
            if block == 0:
                continue
            take = min(r, block)
            if take == block:
                best = max(best, v, min(self.h, s - v))
            else:
                best = max(best, v, self._prefix_max_coord(m - 1, s - v, take))
            r -= take
        return best

    def _max_rest(self, s_star: int, partial: int, full_shells: int) -> int:
        """Largest value taken by coordinates 2..n over the selected set."""
        best = 0
        for i in range(full_shells):
            s = 2 * i
            if self._table[self.n][s]:
                best = max(best, min(self.h, s))
        # Boundary shell: walk its lexicographic prefix block by block.
        rem = partial
        for v in range(0, min(self.h, s_star) + 1):
            if rem == 0:
                break
            block = self._sub_count(self.n - 1, s_star - v)
            if block == 0:
                continue
            take = min(rem, block)
            if take == block:
                best = max(best, min(self.h, s_star - v))
            else:
                best = max(best, self._prefix_max_coord(self.n - 1, s_star - v, take))
            rem -= take
        return best


@dataclass(frozen=True)
class TdSelection:
    """Exact aggregate statistics of a canonical prefix TD(n, H, 2L, M)."""

    indexer: TdIndexer
    m_s: int
    s_star: int               # boundary shell (coordinate sum)
    partial: int              # how many boundary-shell points are included
    sum_l1: int               # sum of coordinate sums over the selection
    first_coord_counts: tuple # histogram of the first coordinate
    max_rest_coord: int       # max over coordinates 2..n
    _partial_v: int

    @property
    def mean_l1(self) -> Fraction:
        """Exact average coordinate sum over the selected points."""
        return Fraction(self.sum_l1, self.m_s)

    @property
    def even_first_count(self) -> int:
        return sum(self.first_coord_counts[0::2])

    @property
    def odd_first_count(self) -> int:
        return sum(self.first_coord_counts[1::2])

    def max_first(self, parity: int | None = None) -> int:
        """Largest first-coordinate value present (optionally of one parity)."""
        vals = range(len(self.first_coord_counts))
        best = -1
        for v in vals:
            if self.first_coord_counts[v] and (parity is None or v % 2 == parity):
                best = v
        return best

    @property
    def max_coord(self) -> int:
        return max(self.max_first(), self.max_rest_coord)


class TdSampler:
    """Vectorized uniform sampler over the first m_s points in canonical order.

    All randomness comes from a caller-supplied numpy Generator, consumed in a
    fixed sequence (one uniform for the shell choice, then one per coordinate),
    so a given generator state always produces the same batch.  Shell and
    coordinate probabilities are exact integer ratios rounded once to float64;
    the resulting distortion of the uniform law is of order 2**-52 per draw.

    Complete shells are sampled coordinate by coordinate through conditional
    cdf tables.  The boundary shell contributes only a lexicographic prefix,
    which is a staircase: at each depth exactly one coordinate value is
    partially filled, so a single precomputed per-depth cutoff row handles it
    without per-point integer arithmetic.
    """

    def __init__(self, indexer: TdIndexer, m_s: int):
        self.indexer = indexer
        self.m_s = m_s
        sel = indexer.selection(m_s)
        n, h = indexer.n, indexer.h
        s_star, partial = sel.s_star, sel.partial
        k_star = s_star // 2

        cum = np.empty(k_star + 1)
        running = 0
        for i in range(k_star):
            running += indexer.shell_sizes[i]
            cum[i] = running / m_s
        cum[k_star] = 1.0
        self._shell_cdf = cum
        self._s_star = s_star

        # Conditional cdf tables for complete shells: _coord_cdf[m][s, v] is
        # P(coordinate <= v | m coordinates remain with total sum s).
        floats = [np.array([float(x) for x in row]) for row in indexer._table]
        self._coord_cdf: list[np.ndarray | None] = [None] * (n + 1)
        for m in range(1, n + 1):
            tab = np.ones((s_star + 1, h + 1))
            tot = floats[m]
            for s in range(s_star + 1):
                if s > m * h or tot[s] == 0.0:
                    continue
                vmax = min(h, s)
                if m == 1:
                    blocks = np.zeros(vmax + 1)
                    blocks[s] = 1.0  # the guard above ensures s <= h here
                else:
                    sub = floats[m - 1]
                    blocks = sub[s - vmax:s + 1][::-1].copy()
                row = np.cumsum(blocks) / tot[s]
                tab[s, :vmax + 1] = np.minimum(row, 1.0)
                tab[s, vmax] = 1.0
            self._coord_cdf[m] = tab

        # Boundary-shell staircase: per depth j a cutoff value and a cdf row.
        self._b_vcut = np.full(n, -1, dtype=np.int64)
        self._b_cdf = np.ones((n, h + 1))
        self._b_alive = [False] * (n + 1)
        if partial < indexer.shell_sizes[k_star]:
            self._b_alive[0] = True
            rem, s_b = partial, s_star
            for j in range(n):
                m = n - j
                acc = 0
                v_cut = None
                blk = 0
                for v in range(min(h, s_b) + 1):
                    blk = indexer._sub_count(m - 1, s_b - v)
                    if rem <= acc + blk:
                        v_cut = v
                        break
                    acc += blk
                if v_cut is None:  # pragma: no cover - selection() guarantees fit
                    raise AssertionError("boundary walk exhausted the shell")
                r_in = rem - acc
                row = np.ones(h + 1)
                run = 0
                for v in range(v_cut):
                    run += indexer._sub_count(m - 1, s_b - v)
                    row[v] = run / rem
                self._b_cdf[j] = row
                self._b_vcut[j] = v_cut
                if r_in == blk:
                    break  # prefix ends on a block boundary; no deeper cutoff
                self._b_alive[j + 1] = True
                rem, s_b = r_in, s_b - v_cut

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` points, shape (count, n), dtype int64."""
        n, h = self.indexer.n, self.indexer.h
        u = rng.random(count)
        k = np.searchsorted(self._shell_cdf, u, side="right")
        s = (2 * k).astype(np.int64)
        boundary = (s == self._s_star) & self._b_alive[0]
        out = np.empty((count, n), dtype=np.int64)
        for j in range(n):
            m = n - j
            u = rng.random(count)
            rows = self._coord_cdf[m][s]
            if boundary.any():
                rows = rows.copy()
                rows[boundary] = self._b_cdf[j]
            v = np.sum(rows <= u[:, None], axis=1)
            out[:, j] = v
            s -= v
            if j + 1 < n:
                boundary = boundary & (v == self._b_vcut[j]) & self._b_alive[j + 1]
        if (s != 0).any():  # pragma: no cover - would mean a broken cdf table
            raise AssertionError("sampler left a nonzero coordinate budget")
        return out


# -- module-level convenience wrappers ------------------------------------


def count_td(n: int, h: int, l: int) -> int:
    """Cardinality of TD(n, H=h, 2L=2l): even-sum points of {0..h}^n, sum <= 2l."""
    return TdIndexer(n, h, l).count


def index_to_point(index: int, n: int, h: int, l: int) -> np.ndarray:
    return TdIndexer(n, h, l).unrank(index)


def point_to_index(point, n: int, h: int, l: int) -> int:
    return TdIndexer(n, h, l).rank(point)


def l1_stats(n: int, h: int, l: int, m_s: int) -> TdSelection:
    return TdIndexer(n, h, l).selection(m_s)
