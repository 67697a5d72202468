"""Dense bit-packed GF(2) matrices and the small set of linear-algebra
routines the rest of the package needs (rank, Gauss-Jordan reduction,
parity-check products).

Rows are packed LSB-first into 64-bit words: column j of a row lives in
word j // 64 at bit position j % 64. Padding bits past `cols` are kept
zero so popcount-based products never see garbage.
"""

from __future__ import annotations

import numpy as np

WORD_BITS = 64


def n_words(cols: int) -> int:
    return (cols + WORD_BITS - 1) // WORD_BITS


def pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack a (…, n) array of 0/1 values into (…, ceil(n/64)) uint64 words."""
    dense = np.asarray(dense, dtype=np.uint8) & 1
    cols = dense.shape[-1]
    pad = n_words(cols) * WORD_BITS - cols
    if pad:
        pad_block = np.zeros(dense.shape[:-1] + (pad,), dtype=np.uint8)
        dense = np.concatenate([dense, pad_block], axis=-1)
    packed = np.packbits(dense, axis=-1, bitorder="little")
    return packed.view(np.uint64).reshape(dense.shape[:-1] + (n_words(cols),))


def unpack_rows(words: np.ndarray, cols: int) -> np.ndarray:
    """Inverse of pack_rows; returns a (…, cols) uint8 array."""
    words = np.atleast_2d(np.asarray(words, dtype=np.uint64))
    bits = np.unpackbits(words.view(np.uint8), axis=-1, bitorder="little")
    return bits[..., :cols]


def parity_mat_vec(row_words: np.ndarray, vec_words: np.ndarray) -> np.ndarray:
    """Per-row parity of popcount(row AND vec) — the syndrome hot loop."""
    return (np.bitwise_count(row_words & vec_words).sum(axis=-1) & 1).astype(np.uint8)


class Gf2Matrix:
    """Immutable row-major bit-packed binary matrix."""

    __slots__ = ("rows", "cols", "words", "_dense", "_row_ints")

    def __init__(self, rows: int, cols: int, words: np.ndarray):
        if words.shape != (rows, n_words(cols)):
            raise ValueError(f"word storage shape {words.shape} does not match "
                             f"{rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.words = np.ascontiguousarray(words, dtype=np.uint64)
        # zero any padding bits beyond cols
        rem = cols % WORD_BITS
        if rem and rows:
            self.words[:, -1] &= np.uint64((1 << rem) - 1)
        self.words.setflags(write=False)
        self._dense = None
        self._row_ints = None

    @classmethod
    def from_dense(cls, dense) -> "Gf2Matrix":
        dense = np.atleast_2d(np.asarray(dense, dtype=np.uint8))
        return cls(dense.shape[0], dense.shape[1], pack_rows(dense))

    @classmethod
    def from_row_ints(cls, ints, cols: int) -> "Gf2Matrix":
        w = n_words(cols)
        words = np.zeros((len(ints), w), dtype=np.uint64)
        for i, v in enumerate(ints):
            words[i] = np.frombuffer(int(v).to_bytes(8 * w, "little"),
                                     dtype=np.uint64)
        return cls(len(ints), cols, words)

    @classmethod
    def identity(cls, size: int) -> "Gf2Matrix":
        return cls.from_dense(np.eye(size, dtype=np.uint8))

    @property
    def dense(self) -> np.ndarray:
        if self._dense is None:
            d = unpack_rows(self.words, self.cols)
            d.setflags(write=False)
            self._dense = d
        return self._dense

    @property
    def row_ints(self) -> list:
        """Rows as python ints (bit j == column j); handy for hot loops."""
        if self._row_ints is None:
            self._row_ints = [int.from_bytes(self.words[i].tobytes(), "little")
                              for i in range(self.rows)]
        return self._row_ints

    def transpose(self) -> "Gf2Matrix":
        return Gf2Matrix.from_dense(self.dense.T)

    def mul(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        prod = (self.dense.astype(np.uint32) @ other.dense.astype(np.uint32)) & 1
        return Gf2Matrix.from_dense(prod.astype(np.uint8))

    def is_zero(self) -> bool:
        return not self.words.any()

    def rank(self) -> int:
        return gf2_rank(self.row_ints, self.cols)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Gf2Matrix) and self.rows == other.rows
                and self.cols == other.cols
                and np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self):
        return f"Gf2Matrix({self.rows}x{self.cols})"

    # pickling support (numpy array with write=False survives a round trip,
    # but the cached views should not be carried along)
    def __getstate__(self):
        return (self.rows, self.cols, np.array(self.words))

    def __setstate__(self, state):
        rows, cols, words = state
        self.__init__(rows, cols, words)


def gf2_rank(rows, n_cols: int) -> int:
    """Rank of a list of int-packed rows via Gaussian elimination."""
    work = [int(r) for r in rows]
    rank = 0
    for col in range(n_cols):
        mask = 1 << col
        pivot = None
        for i in range(rank, len(work)):
            if work[i] & mask:
                pivot = i
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for i in range(len(work)):
            if i != rank and (work[i] & mask):
                work[i] ^= work[rank]
        rank += 1
        if rank == len(work):
            break
    return rank


def gauss_jordan_systematic(rows, cols: int):
    """Reduce k independent rows so that the first k columns become I_k.

    Column swaps are applied only when the leading block is singular; the
    applied permutation (sys column -> original column) is returned, or
    None when no swap was needed.
    """
    work = [int(r) for r in rows]
    k = len(work)
    perm = list(range(cols))
    swapped = False
    for r in range(k):
        pivot = _find_pivot(work, r, k)
        if pivot is None:
            # no 1 anywhere in column r at/below row r: bring in a later column
            for c in range(r + 1, cols):
                if any(work[i] & (1 << c) for i in range(r, k)):
                    _swap_columns(work, r, c)
                    perm[r], perm[c] = perm[c], perm[r]
                    swapped = True
                    pivot = _find_pivot(work, r, k)
                    break
            if pivot is None:
                raise ValueError("rows are not linearly independent")
        work[r], work[pivot] = work[pivot], work[r]
        mask = 1 << r
        for i in range(k):
            if i != r and (work[i] & mask):
                work[i] ^= work[r]
    return work, (perm if swapped else None)


def _find_pivot(work, r, k):
    mask = 1 << r
    for i in range(r, k):
        if work[i] & mask:
            return i
    return None


def _swap_columns(work, a, b):
    ma, mb = 1 << a, 1 << b
    for i, row in enumerate(work):
        bit_a = (row >> a) & 1
        bit_b = (row >> b) & 1
        if bit_a != bit_b:
            work[i] = row ^ ma ^ mb


def solve_parity(h_rows, cols: int, rhs_bits) -> np.ndarray:
    """Find one z (length cols) with z @ H^T = rhs over GF(2).

    h_rows are int-packed rows of H; rhs_bits is a 0/1 vector of len(h_rows).
    """
    aug = [int(h) | (int(b) << cols) for h, b in zip(h_rows, rhs_bits)]
    m = len(aug)
    pivot_cols = []
    r = 0
    for col in range(cols):
        mask = 1 << col
        pivot = None
        for i in range(r, m):
            if aug[i] & mask:
                pivot = i
                break
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        for i in range(m):
            if i != r and (aug[i] & mask):
                aug[i] ^= aug[r]
        pivot_cols.append(col)
        r += 1
        if r == m:
            break
    rhs_mask = 1 << cols
    for i in range(r, m):
        if aug[i] & rhs_mask:
            raise ValueError("inconsistent parity system")
    z = np.zeros(cols, dtype=np.uint8)
    for i, col in enumerate(pivot_cols):
        if aug[i] & rhs_mask:
            z[col] = 1
    return z
