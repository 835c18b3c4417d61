"""Constellation construction for intensity-constrained lattice signaling.

Three codebook families over n = 24 dimensions, all nonnegative integer point
sets scaled by a single rational gain kappa:

* a coset-coded design layering an enumerative shaping alphabet, the extended
  Golay code, and a two-coset split of the Leech lattice;
* a shaping-only baseline drawing its points straight from the checkerboard
  lattice D24;
* an unshaped cubic baseline (independent uniform levels per coordinate).

kappa is chosen in exact rational arithmetic as the largest gain satisfying
both constraints: every scaled coordinate stays in [0, 1] and the average
scaled coordinate stays at or below the intensity target alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .codes import GOLAY, BinaryBlockCode
from .shells import TdIndexer, TdParams, TdSampler, TdSelection

__all__ = [
    "AlphabetChoice",
    "ConstellationSpec",
    "DemapError",
    "XI_PLUS",
    "XI_MINUS",
    "build_cubic_spec",
    "build_oslc_spec",
    "build_spec",
    "build_tcc_spec",
    "demap_point",
    "determine_params",
    "map_bits",
    "spec_to_json",
    "xi_tilde",
]

# Minimum distances and kissing numbers of the two integer lattice copies in
# play: 2 * (half lattice) + coset shift is a Leech copy at scale 4*sqrt(2),
# and the shaping-only baseline lives on D24 with minimum distance sqrt(2).
LEECH_MIN_DIST = 4.0 * math.sqrt(2.0)
LEECH_KISSING = 196560
DN_MIN_DIST = math.sqrt(2.0)
DN_KISSING = 2 * 24 * 23

# The two translation vectors that keep coset points nonnegative.  Their
# difference (8, 0, ..., 0) lies in twice the half lattice, so either choice
# lands in the same Leech coset.
XI_PLUS = np.array([5] + [1] * 23, dtype=np.int64)
XI_MINUS = np.array([-3] + [1] * 23, dtype=np.int64)


class DemapError(ValueError):
    """Raised when a vector does not demap to any constellation label."""


def xi_tilde(h: np.ndarray) -> np.ndarray:
    """Nonnegativity-preserving translation for the half-lattice point ``h``.

    Doubling h and adding either translation yields the same Leech coset; the
    branch is picked from 2*h[0] mod 8 so that the sum stays coordinatewise
    nonnegative over the shaped alphabet.
    """
    h = np.asarray(h)
    return XI_PLUS if (2 * int(h[0])) % 8 in (0, 2) else XI_MINUS


def _as_fraction(alpha) -> Fraction:
    """Exact intensity target.  Floats go through repr so 0.2 means 1/5."""
    if isinstance(alpha, Fraction):
        frac = alpha
    elif isinstance(alpha, float):
        frac = Fraction(repr(alpha))
    else:
        frac = Fraction(alpha)
    if not 0 < frac < Fraction(1, 2):
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    return frac


@dataclass(frozen=True)
class AlphabetChoice:
    """Outcome of the box-height scan for one shaping alphabet."""

    params: TdParams
    kappa: Fraction
    peak_unscaled: int
    avg_l1_unscaled: Fraction


def _oslc_stats(sel: TdSelection, code: BinaryBlockCode) -> tuple[int, Fraction]:
    """Peak coordinate and exact mean coordinate sum of the full mapped set.

    A transmitted point is 4*d + 2*c + a * xi_tilde, with d from the shaping
    selection, c uniform over the code, and a a fair bit.  The peak scans the
    four achievable extremes of the first coordinate (both translation
    branches) and of the remaining coordinates; the mean splits into the three
    independent layers.
    """
    peak_candidates = [
        4 * sel.max_first() + 2,
        4 * sel.max_first(parity=0) + 7,
        4 * sel.max_rest_coord + 3,
    ]
    max_odd_first = sel.max_first(parity=1)
    if max_odd_first >= 0:
        peak_candidates.append(4 * max_odd_first - 1)
    peak = max(peak_candidates)

    total_ones = sum(w * count for w, count in code.weight_enumerator().items())
    avg_code = Fraction(2 * total_ones, 2 ** code.k)
    avg_shift = Fraction(
        sel.even_first_count * int(XI_PLUS.sum())
        + sel.odd_first_count * int(XI_MINUS.sum()),
        2 * sel.m_s,
    )
    return peak, 4 * sel.mean_l1 + avg_code + avg_shift


def _tcc_stats(sel: TdSelection) -> tuple[int, Fraction]:
    return sel.max_coord, sel.mean_l1


def determine_params(
    n: int, m_s: int, alpha, kind: str = "oslc", code: BinaryBlockCode = GOLAY
) -> AlphabetChoice:
    """Scan box heights and keep the one maximizing the admissible gain.

    For each height H the alphabet is the m_s lowest-sum points in canonical
    order, L is set by the boundary shell, and kappa(H) is the reciprocal of
    the binding constraint (peak, or mean divided by n*alpha).  The peak term
    never decreases in H while the mean term never increases, so the scan can
    stop a few steps after the two cross; six extra steps cover the small
    wobble the translation layer adds to the peak.  Ties keep the smaller H.
    """
    alpha = _as_fraction(alpha)
    if kind not in ("oslc", "tcc"):
        raise ValueError(f"no shaping scan for kind {kind!r}")
    best: AlphabetChoice | None = None
    crossing = None
    h = 1
    while True:
        full = TdIndexer(n, h, (n * h) // 2)
        if full.count >= m_s:
            sel = full.selection(m_s)
            if kind == "oslc":
                peak, avg = _oslc_stats(sel, code)
            else:
                peak, avg = _tcc_stats(sel)
            bound = avg / (n * alpha)
            kappa = 1 / max(Fraction(peak), bound)
            if best is None or kappa > best.kappa:
                params = TdParams(n, h, sel.s_star // 2, m_s)
                best = AlphabetChoice(params, kappa, peak, avg)
            saturated = h >= sel.s_star  # box constraint no longer active
            if crossing is None and (peak >= bound or saturated):
                crossing = h
            if crossing is not None and h >= crossing + 6:
                return best
        h += 1


@dataclass(frozen=True, eq=False)
class ConstellationSpec:
    """Everything needed to map bits, sample, decode, and audit one design."""

    kind: str                     # "oslc", "tcc", or "cubic"
    n: int
    beta: int                     # bits per dimension
    alpha: Fraction               # average-intensity target
    kappa: Fraction               # scaling gain applied to integer points
    peak_unscaled: int            # max coordinate over the integer point set
    avg_l1_unscaled: Fraction     # exact mean coordinate sum
    k_s: int                      # shaping bits per symbol
    k_c: int                      # code bits per symbol
    k_a: int                      # coset bits per symbol
    td: TdParams | None           # shaping alphabet geometry (None for cubic)
    code: BinaryBlockCode | None
    d_min_unscaled: float
    kissing: int | None

    @property
    def bits_per_symbol(self) -> int:
        return self.n * self.beta

    @property
    def size(self) -> int:
        return 1 << self.bits_per_symbol

    @property
    def scaled_min_distance(self) -> float:
        return float(self.kappa) * self.d_min_unscaled

    @cached_property
    def indexer(self) -> TdIndexer | None:
        return self.td.indexer() if self.td is not None else None

    @cached_property
    def selection(self) -> TdSelection | None:
        if self.td is None:
            return None
        return self.indexer.selection(self.td.m_s)

    @cached_property
    def sampler(self) -> TdSampler | None:
        if self.td is None:
            return None
        return TdSampler(self.indexer, self.td.m_s)


def build_oslc_spec(beta: int, alpha) -> ConstellationSpec:
    """Shaped coset design: shaping bits + Golay bits + one coset bit."""
    alpha = _as_fraction(alpha)
    n, code = 24, GOLAY
    k_c, k_a = code.k, 1
    k_s = n * beta - k_c - k_a
    if k_s < 1:
        raise ValueError(f"beta={beta} leaves no room for shaping bits")
    choice = determine_params(n, 1 << k_s, alpha, kind="oslc", code=code)
    return ConstellationSpec(
        kind="oslc",
        n=n,
        beta=beta,
        alpha=alpha,
        kappa=choice.kappa,
        peak_unscaled=choice.peak_unscaled,
        avg_l1_unscaled=choice.avg_l1_unscaled,
        k_s=k_s,
        k_c=k_c,
        k_a=k_a,
        td=choice.params,
        code=code,
        d_min_unscaled=LEECH_MIN_DIST,
        kissing=LEECH_KISSING,
    )


def build_tcc_spec(beta: int, alpha) -> ConstellationSpec:
    """Shaping-only baseline on D24: all bits index the shaped alphabet."""
    alpha = _as_fraction(alpha)
    n = 24
    k_s = n * beta
    choice = determine_params(n, 1 << k_s, alpha, kind="tcc")
    return ConstellationSpec(
        kind="tcc",
        n=n,
        beta=beta,
        alpha=alpha,
        kappa=choice.kappa,
        peak_unscaled=choice.peak_unscaled,
        avg_l1_unscaled=choice.avg_l1_unscaled,
        k_s=k_s,
        k_c=0,
        k_a=0,
        td=choice.params,
        code=None,
        d_min_unscaled=DN_MIN_DIST,
        kissing=DN_KISSING,
    )


def build_cubic_spec(beta: int, alpha) -> ConstellationSpec:
    """Unshaped baseline: independent uniform levels 0..2**beta - 1 scaled by
    delta = min(1, 2*alpha) / (2**beta - 1), which meets whichever of the peak
    and mean constraints binds first."""
    alpha = _as_fraction(alpha)
    n = 24
    levels = (1 << beta) - 1
    if levels < 1:
        raise ValueError("cubic design needs beta >= 1")
    delta = min(Fraction(1), 2 * alpha) / levels
    return ConstellationSpec(
        kind="cubic",
        n=n,
        beta=beta,
        alpha=alpha,
        kappa=delta,
        peak_unscaled=levels,
        avg_l1_unscaled=Fraction(n * levels, 2),
        k_s=0,
        k_c=0,
        k_a=0,
        td=None,
        code=None,
        d_min_unscaled=1.0,
        kissing=None,
    )


_BUILDERS = {
    "oslc": build_oslc_spec,
    "tcc": build_tcc_spec,
    "cubic": build_cubic_spec,
}


def build_spec(kind: str, beta: int, alpha) -> ConstellationSpec:
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ValueError(
            f"unknown constellation kind {kind!r}; pick one of {sorted(_BUILDERS)}"
        ) from None
    return builder(beta, alpha)


# -- bit mapping -----------------------------------------------------------


def _bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def _int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def _check_bits(spec: ConstellationSpec, bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.int64).ravel()
    if arr.size != spec.bits_per_symbol:
        raise ValueError(
            f"expected {spec.bits_per_symbol} bits, got {arr.size}"
        )
    if ((arr != 0) & (arr != 1)).any():
        raise ValueError("bits must be 0 or 1")
    return arr


def map_bits(spec: ConstellationSpec, bits) -> np.ndarray:
    """Map one symbol's bits to an unscaled integer constellation point.

    Bit layout is big-endian [shaping | code | coset] for the coset design,
    one big-endian shaping index for the D24 baseline, and beta bits per
    coordinate for the cubic baseline.
    """
    arr = _check_bits(spec, bits)
    if spec.kind == "cubic":
        weights = 1 << np.arange(spec.beta - 1, -1, -1, dtype=np.int64)
        return arr.reshape(spec.n, spec.beta) @ weights
    if spec.kind == "tcc":
        return spec.indexer.unrank(_bits_to_int(arr))
    d = spec.indexer.unrank(_bits_to_int(arr[: spec.k_s]))
    c = spec.code.encode(arr[spec.k_s : spec.k_s + spec.k_c])
    h = 2 * d + c
    point = 2 * h
    if arr[-1]:
        point = point + xi_tilde(h)
    return point


def _demap_coset_point(spec: ConstellationSpec, lam: np.ndarray) -> list[int]:
    parities = lam % 2
    if (parities != parities[0]).any():
        raise DemapError("mixed coordinate parities")
    a = int(parities[0])
    if a == 0:
        c = (lam // 2) % 2
        d4 = lam - 2 * c
    else:
        c = ((lam - 1) // 2) % 2
        first = int(lam[0]) - 5  # assume the +5 translation branch, then repair
        c[0] = (first % 4) // 2
        d_first = (first - 2 * int(c[0])) // 4
        if d_first % 2:
            d_first += 2  # odd remainder means the -3 branch; parity now agrees
        shift = XI_MINUS if d_first % 2 else XI_PLUS
        d4 = lam - 2 * c - shift
        d4[0] = 4 * d_first
    if (d4 % 4).any():
        raise DemapError("residue is not a doubled half-lattice point")
    d = d4 // 4
    if not spec.code.is_codeword(c):
        raise DemapError("code layer is not a codeword")
    td = spec.td
    if (d < 0).any() or (d > td.h).any():
        raise DemapError("shaping point outside the box")
    try:
        index = spec.indexer.rank(d)
    except ValueError as exc:
        raise DemapError(str(exc)) from None
    if index >= td.m_s:
        raise DemapError("shaping point outside the selected alphabet")
    return (
        _int_to_bits(index, spec.k_s)
        + [int(b) for b in spec.code.message_of(c)]
        + [a]
    )


def demap_point(spec: ConstellationSpec, point) -> np.ndarray:
    """Invert map_bits.  Raises DemapError for vectors outside the codebook."""
    lam = np.asarray(point)
    if lam.shape != (spec.n,):
        raise ValueError(f"expected a length-{spec.n} point")
    if not np.issubdtype(lam.dtype, np.integer):
        rounded = np.rint(lam)
        if not np.array_equal(rounded, lam):
            raise DemapError("point has non-integer coordinates")
        lam = rounded
    lam = lam.astype(np.int64)
    if spec.kind == "cubic":
        if (lam < 0).any() or (lam > spec.peak_unscaled).any():
            raise DemapError("level out of range")
        bits = [
            (int(v) >> (spec.beta - 1 - i)) & 1
            for v in lam
            for i in range(spec.beta)
        ]
        return np.array(bits, dtype=np.int64)
    if spec.kind == "tcc":
        try:
            index = spec.indexer.rank(lam)
        except ValueError as exc:
            raise DemapError(str(exc)) from None
        if index >= spec.td.m_s:
            raise DemapError("point outside the selected alphabet")
        return np.array(_int_to_bits(index, spec.k_s), dtype=np.int64)
    return np.array(_demap_coset_point(spec, lam), dtype=np.int64)


def spec_to_json(spec: ConstellationSpec) -> dict:
    """JSON-ready summary of a built design (big integers as strings)."""
    doc = {
        "kind": spec.kind,
        "n": spec.n,
        "beta": spec.beta,
        "bits_per_symbol": spec.bits_per_symbol,
        "points": str(spec.size),
        "alpha": str(spec.alpha),
        "kappa": str(spec.kappa),
        "kappa_float": float(spec.kappa),
        "peak_unscaled": spec.peak_unscaled,
        "avg_l1_unscaled": str(spec.avg_l1_unscaled),
        "avg_l1_float": float(spec.avg_l1_unscaled),
        "scaled_min_distance": spec.scaled_min_distance,
        "bit_split": {"shaping": spec.k_s, "code": spec.k_c, "coset": spec.k_a},
    }
    if spec.kissing is not None:
        doc["kissing"] = spec.kissing
    if spec.td is not None:
        doc["shaping_box"] = {
            "h": spec.td.h,
            "l": spec.td.l,
            "m_s": str(spec.td.m_s),
        }
    return doc
