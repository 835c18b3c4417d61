"""Nearest-point and bounded-distance decoders for the lattice tower.

The tower, all in unscaled integer coordinates:

    D_n   : integer vectors with even coordinate sum (checkerboard),
    U_n   : 2 Z^n + C          (mod-2 residues form a codeword of C),
    H_n   : 2 D_n + C          (as U_n, plus even parity of the integer part),
    Lambda: union over translations a of  2 H_n + a.

With C the (24,12,8) Golay code, H_24 has minimum distance sqrt(8) and the
two-coset union with a = (-3, 1, ..., 1) is the Leech lattice (minimum
distance 4*sqrt(2), kissing number 196560).

Decoding follows the classic three stages: exact closest point in U_n via
per-coordinate even/odd representatives plus soft-ML decoding of the code;
a single +-2 parity repair to land in H_n (bounded-distance optimal within
the packing radius); and a minimum-distance sweep over coset translations.
Tie rules are pinned down everywhere so results are reproducible: halves
round toward the smaller integer, and among equal candidates the smallest
coordinate index (or first-listed coset) wins.

Every decoder has a batch form operating on (B, n) arrays; the scalar forms
are thin wrappers.  All arithmetic is float64; decisions are exact ML for
U_n and D_n, bounded-distance for H_n and the coset union.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import GOLAY, BinaryBlockCode

__all__ = [
    "DecodedLatticePoint",
    "XI",
    "nearest_point_dn",
    "closest_point_construction_a",
    "bdd_half_lattice",
    "decode_shifted_union",
    "in_dn",
    "in_construction_a",
    "in_half_lattice",
]

# Canonical translation vector joining the two Leech half-lattice cosets.
XI = np.array([-3] + [1] * 23, dtype=np.int64)


@dataclass(frozen=True)
class DecodedLatticePoint:
    point: np.ndarray
    distance_sq: float
    coset_index: int


# -- membership predicates (exact integer tests) ---------------------------


def in_dn(x) -> bool:
    v = np.asarray(x)
    return bool(np.all(v == np.round(v)) and int(np.sum(v)) % 2 == 0)


def in_construction_a(x, code: BinaryBlockCode = GOLAY) -> bool:
    v = np.asarray(x, dtype=np.int64)
    return code.is_codeword(v % 2)


def in_half_lattice(x, code: BinaryBlockCode = GOLAY) -> bool:
    v = np.asarray(x, dtype=np.int64)
    c = v % 2
    return code.is_codeword(c) and int((v - c).sum() // 2) % 2 == 0


# -- D_n --------------------------------------------------------------------


def _round_half_down(y: np.ndarray) -> np.ndarray:
    """Round to nearest integer, resolving .5 ties toward the smaller value."""
    return np.ceil(y - 0.5)


def nearest_point_dn_batch(y: np.ndarray) -> np.ndarray:
    """Exact closest checkerboard point for each row of y, shape (B, n)."""
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    z = _round_half_down(y)
    odd = (z.sum(axis=1).astype(np.int64) & 1).astype(bool)
    if odd.any():
        err = y[odd] - z[odd]
        i = np.argmax(np.abs(err), axis=1)          # first max on ties
        rows = np.arange(err.shape[0])
        step = np.where(err[rows, i] >= 0.0, 1.0, -1.0)
        zf = z[odd]
        zf[rows, i] += step
        z[odd] = zf
    return z.astype(np.int64)


def nearest_point_dn(y) -> np.ndarray:
    """Closest point of D_n to y.

    Round every coordinate (halves toward the smaller integer); if the sum
    came out odd, re-round the coordinate with the largest rounding error the
    other way (smallest index on ties, upward when the error is exactly zero).
    The result is always a true closest point; only the tie choice is ours.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 2:
        raise ValueError("expected a single vector of dimension >= 2")
    return nearest_point_dn_batch(y[None, :])[0]


# -- U_n = 2 Z^n + C ---------------------------------------------------------


def _representative_costs(w: np.ndarray):
    """Best even/odd integer representative per coordinate, with sq costs.

    Ties between the two nearest even (or odd) integers go to the smaller
    value, via the half-down rounding rule applied on the halved axis.
    """
    even = 2.0 * _round_half_down(w / 2.0)
    odd = 2.0 * _round_half_down((w - 1.0) / 2.0) + 1.0
    return even, odd, (w - even) ** 2, (w - odd) ** 2


def closest_point_construction_a_batch(w: np.ndarray, code: BinaryBlockCode = GOLAY):
    """Exact closest points of 2Z^n + C for rows of w.

    Returns (points (B, n) int64, codeword message indices (B,)).
    """
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    if w.shape[1] != code.n:
        raise ValueError(f"dimension {w.shape[1]} does not match code length {code.n}")
    even, odd, cost0, cost1 = _representative_costs(w)
    idx = code.soft_ml_decode_batch(cost0, cost1)
    bits = code.codebook[idx]
    u = np.where(bits.astype(bool), odd, even)
    return u.astype(np.int64), idx


def closest_point_construction_a(w, code: BinaryBlockCode = GOLAY) -> np.ndarray:
    """Exact closest point of the mod-2 code lattice 2Z^n + C to w.

    Per coordinate the best even and best odd integers are costed; the code's
    exhaustive soft-ML decode then picks the globally optimal parity pattern,
    which is the exact lattice ML because coordinates decouple given the
    codeword.
    """
    w = np.asarray(w, dtype=np.float64)
    u, _ = closest_point_construction_a_batch(w[None, :], code)
    return u[0]


# -- H_n = 2 D_n + C ---------------------------------------------------------


def bdd_half_lattice_batch(w: np.ndarray, code: BinaryBlockCode = GOLAY) -> np.ndarray:
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    u, idx = closest_point_construction_a_batch(w, code)
    bits = code.codebook[idx]
    zsum = ((u - bits) // 2).sum(axis=1)
    bad = (zsum & 1).astype(bool)
    if bad.any():
        err = w[bad] - u[bad]
        i = np.argmax(np.abs(err), axis=1)
        rows = np.arange(err.shape[0])
        step = np.where(err[rows, i] >= 0.0, 2, -2).astype(np.int64)
        uf = u[bad]
        uf[rows, i] += step
        u[bad] = uf
    return u


def bdd_half_lattice(w, code: BinaryBlockCode = GOLAY) -> np.ndarray:
    """Bounded-distance decode into H_n = 2 D_n + C.

    Exact closest point in U_n first; if the integer layer has odd sum, one
    coordinate is moved by 2 toward w, namely the one with the largest
    residual error (smallest index on ties).  Guaranteed to return the
    true closest H_n point whenever dist(w, H_n) is below the packing
    radius sqrt(2).
    """
    w = np.asarray(w, dtype=np.float64)
    return bdd_half_lattice_batch(w[None, :], code)[0]


# -- coset unions (Leech via two translated copies of 2 H_24) ----------------


def decode_shifted_union_batch(
    y: np.ndarray,
    cosets,
    scale: int = 2,
    code: BinaryBlockCode = GOLAY,
):
    """Minimum-distance decode over union_a (scale * H_n + a), batched.

    Returns (points (B, n) int64, distance_sq (B,), coset_index (B,)).
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if len(cosets) == 0:
        raise ValueError("need at least one coset translation")
    best_pt = None
    best_d = None
    best_a = None
    for ai, a in enumerate(cosets):
        av = np.asarray(a, dtype=np.float64)
        h = bdd_half_lattice_batch((y - av) / scale, code)
        cand = scale * h + av.astype(np.int64)
        d = ((cand - y) ** 2).sum(axis=1)
        if best_pt is None:
            best_pt, best_d = cand, d
            best_a = np.zeros(len(d), dtype=np.int64)
        else:
            better = d < best_d        # strict: earlier coset wins ties
            best_pt = np.where(better[:, None], cand, best_pt)
            best_d = np.where(better, d, best_d)
            best_a = np.where(better, ai, best_a)
    return best_pt, best_d, best_a


def decode_shifted_union(y, cosets, scale: int = 2,
                         code: BinaryBlockCode = GOLAY) -> DecodedLatticePoint:
    """Decode y against the union of translated, scaled half-lattices.

    Each coset a contributes the candidate scale * bdd((y - a)/scale) + a;
    the closest candidate wins (first-listed coset on exact ties).  With
    cosets (0, XI) and scale 2 at n = 24 this is the Leech lattice decoder,
    bounded-distance optimal within radius 2*sqrt(2).
    """
    y = np.asarray(y, dtype=np.float64)
    pt, d, a = decode_shifted_union_batch(y[None, :], cosets, scale, code)
    return DecodedLatticePoint(point=pt[0], distance_sq=float(d[0]), coset_index=int(a[0]))
