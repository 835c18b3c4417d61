"""Binary linear block codes backing the lattice constructions.

Two codes matter here: the (24,12,8) extended Golay code, which supplies the
fine-coding layer of the 24-dimensional constellation, and the (n, n-1)
single-parity-check code implicit in the mod-4 layer.  Soft-decision decoding
is exact maximum likelihood by exhaustive metric scan over the codebook:
4096 x 24 multiply-adds per Golay decode, which is microseconds with the
codebook held as one dense array and negligible next to the Monte-Carlo
budget.  Batch decoding feeds the whole per-coordinate cost table through a
single matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BinaryBlockCode",
    "SoftDecodeResult",
    "GOLAY",
    "HAMMING8",
    "parity_encode",
]


@dataclass(frozen=True)
class SoftDecodeResult:
    codeword: np.ndarray
    metric: float
    message_index: int


class BinaryBlockCode:
    """An (n, k) binary linear code given by a generator matrix.

    The full codebook (2^k codewords) is materialized once; encode, membership
    and exhaustive soft-ML decoding all run off it.  Intended for k <= 16.
    """

    def __init__(self, generator, d_min: int | None = None, name: str = ""):
        g = np.asarray(generator, dtype=np.uint8) % 2
        if g.ndim != 2:
            raise ValueError("generator must be a 2-D binary matrix")
        self.k, self.n = g.shape
        self.generator = g
        self.name = name or f"({self.n},{self.k})"
        if self.k > 16:
            raise ValueError("exhaustive codebook limited to k <= 16")
        msgs = (np.arange(1 << self.k, dtype=np.uint32)[:, None]
                >> np.arange(self.k, dtype=np.uint32)) & 1
        self.codebook = (msgs.astype(np.uint8) @ g) % 2
        weights = self.codebook.sum(axis=1)
        if len(np.unique(self.codebook @ (1 << np.arange(self.n, dtype=object)))) \
                != 1 << self.k:
            raise ValueError(f"{self.name}: generator rows are not independent")
        self.d_min = int(weights[1:].min()) if self.k > 0 else self.n
        if d_min is not None and self.d_min != d_min:
            raise ValueError(
                f"{self.name}: declared minimum distance {d_min}, actual {self.d_min}"
            )
        # float view used by the decoders' matrix products
        self._book_f = self.codebook.astype(np.float64)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"BinaryBlockCode({self.name}, d_min={self.d_min})"

    def encode(self, message) -> np.ndarray:
        m = np.asarray(message, dtype=np.uint8)
        if m.shape != (self.k,):
            raise ValueError(f"message must have length {self.k}")
        return (m @ self.generator) % 2

    def message_of(self, codeword) -> np.ndarray:
        """Recover the message of a systematic codeword (first k coordinates)."""
        c = np.asarray(codeword, dtype=np.uint8)
        return c[: self.k].copy()

    def is_codeword(self, word) -> bool:
        w = np.asarray(word, dtype=np.uint8) % 2
        if w.shape != (self.n,):
            return False
        idx = int(w[: self.k] @ (1 << np.arange(self.k, dtype=np.uint64)))
        return bool(np.array_equal(self.codebook[idx], w))

    def weight_enumerator(self) -> dict[int, int]:
        """Exhaustive weight distribution {weight: count} over all codewords."""
        w, c = np.unique(self.codebook.sum(axis=1), return_counts=True)
        return {int(a): int(b) for a, b in zip(w, c)}

    def is_self_dual(self) -> bool:
        return self.k * 2 == self.n and not ((self.generator @ self.generator.T) % 2).any()

    # -- soft-decision ML ---------------------------------------------------

    def soft_ml_decode(self, cost0, cost1) -> SoftDecodeResult:
        """Exact ML decode against per-coordinate costs.

        cost0[j] / cost1[j] is the penalty for deciding bit j as 0 / 1
        (typically squared distances to the nearest even/odd representative).
        Scans all 2^k codewords; ties resolve to the lowest message index.
        """
        c0 = np.asarray(cost0, dtype=np.float64)
        c1 = np.asarray(cost1, dtype=np.float64)
        if c0.shape != (self.n,) or c1.shape != (self.n,):
            raise ValueError(f"cost vectors must have length {self.n}")
        metrics = self._book_f @ (c1 - c0)
        idx = int(np.argmin(metrics))
        return SoftDecodeResult(
            codeword=self.codebook[idx].copy(),
            metric=float(metrics[idx] + c0.sum()),
            message_index=idx,
        )

    def soft_ml_decode_batch(self, cost0: np.ndarray, cost1: np.ndarray) -> np.ndarray:
        """Vectorized soft_ml_decode: (B, n) cost tables -> (B,) message indices.

        Works in row chunks so the (chunk, 2^k) metric matrix stays around
        64 MB no matter how large the batch is.
        """
        delta = cost1 - cost0
        rows = delta.shape[0]
        chunk = max(1, (1 << 23) // (1 << self.k))
        if rows <= chunk:
            return np.argmin(delta @ self._book_f.T, axis=1)
        out = np.empty(rows, dtype=np.int64)
        for lo in range(0, rows, chunk):
            hi = min(lo + chunk, rows)
            out[lo:hi] = np.argmin(delta[lo:hi] @ self._book_f.T, axis=1)
        return out


def parity_encode(message) -> np.ndarray:
    """Append the XOR of all bits, yielding an even-weight word."""
    m = np.asarray(message, dtype=np.uint8) % 2
    if m.ndim != 1 or m.size < 1:
        raise ValueError("message must be a nonempty bit vector")
    return np.concatenate([m, [m.sum() % 2]]).astype(np.uint8)


# Systematic [I | B] generator of the extended Golay code.  B is the standard
# bordered-circulant block; the constructor re-verifies (24, 12, 8) and the
# self-duality of the span, so a corrupted constant cannot load silently.
_GOLAY_B = [
    [1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1],
    [1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1],
    [0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1],
    [1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1],
    [1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1],
    [1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1],
    [0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 1],
    [0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1],
    [0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 0, 1],
    [1, 0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1],
    [0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0],
]


def _build_golay() -> BinaryBlockCode:
    gen = np.hstack([np.eye(12, dtype=np.uint8), np.array(_GOLAY_B, dtype=np.uint8)])
    code = BinaryBlockCode(gen, d_min=8, name="Golay(24,12,8)")
    if not code.is_self_dual():
        raise AssertionError("Golay generator failed the self-duality check")
    return code


GOLAY = _build_golay()

# Extended Hamming (8,4,4): the small self-dual stand-in used by the
# reduced-dimension lattice tests, where exhaustive oracles are affordable.
HAMMING8 = BinaryBlockCode(
    np.hstack([
        np.eye(4, dtype=np.uint8),
        (1 - np.eye(4, dtype=np.uint8)).astype(np.uint8),
    ]),
    d_min=4,
    name="ExtHamming(8,4,4)",
)
