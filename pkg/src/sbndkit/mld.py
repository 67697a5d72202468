"""Maximum-likelihood decoding: exhaustive correlation search for small
codes and ordered-statistics decoding (OSD) as the scalable reference.

Both return the decision as a coset error pattern so callers can use them
interchangeably for dataset labeling. Ties in the correlation metric are
broken toward the lexicographically smallest codeword, which keeps every
downstream artifact deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .codes import CodeError, LinearCode
from .channel import ReceivedWord


@dataclass
class ErrorPattern:
    bits: np.ndarray
    hamming_weight: int
    reliability_weight: float

    @classmethod
    def from_bits(cls, bits: np.ndarray, abs_llr: np.ndarray) -> "ErrorPattern":
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(bits=bits, hamming_weight=int(bits.sum()),
                   reliability_weight=float(abs_llr[bits == 1].sum()))


@dataclass
class MldDecision:
    codeword: np.ndarray
    error_pattern: ErrorPattern
    correlation: float


def default_order(code: LinearCode) -> int:
    """Reprocessing order floor(d_min / 4) used for dataset labeling."""
    return code.d_min // 4


def _bits_to_int(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def _int_to_bits(v: int, n: int) -> np.ndarray:
    raw = np.frombuffer(v.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n]


def _lex_key(cw_int: int, n: int) -> int:
    """Bit-reversed value: smaller key == lexicographically smaller bit array."""
    out = 0
    for i in range(n):
        out = (out << 1) | ((cw_int >> i) & 1)
    return out


# ---------------------------------------------------------------------------
# exhaustive MLD

_TABLE_K_MAX = 16  # cache full codebooks only while they stay small


def _codeword_table(code: LinearCode) -> np.ndarray:
    """All codewords in lexicographic order (systematic G makes info order
    equal codeword order when infos enumerate MSB-first)."""
    table = getattr(code, "_cw_table", None)
    if table is None:
        k = code.k
        infos = np.zeros((1 << k, k), dtype=np.uint8)
        j = np.arange(1 << k, dtype=np.uint32)
        for i in range(k):
            infos[:, i] = (j >> (k - 1 - i)) & 1
        table = code.encode_batch(infos)
        table.setflags(write=False)
        code._cw_table = table
    return table


def mld_exhaustive(code: LinearCode, received: ReceivedWord) -> MldDecision:
    """Correlation-maximizing codeword over the full codebook."""
    if code.k > 24:
        raise CodeError(f"k={code.k} too large for exhaustive MLD")
    llr = received.llr
    if code.k <= _TABLE_K_MAX:
        table = _codeword_table(code)
        corr = (1.0 - 2.0 * table.astype(np.float64)) @ llr
        j = int(np.argmax(corr))  # first max == lexicographically smallest
        cw = table[j].copy()
        correlation = float(corr[j])
    else:
        cw, correlation = _mld_gray(code, llr)
    e_bits = cw ^ received.z
    pattern = ErrorPattern.from_bits(e_bits, np.abs(llr))
    return MldDecision(codeword=cw, error_pattern=pattern,
                       correlation=correlation)


def _mld_gray(code: LinearCode, llr: np.ndarray):
    """Streaming enumeration for k past the table cutoff."""
    rows = code.G.row_ints
    n = code.n
    llr_list = llr.tolist()
    total = float(np.sum(llr))
    cur = 0
    # running sum of llr over set bits of cur; corr = total - 2 * that sum
    set_sum = 0.0
    best_corr = total
    best_cw = 0
    best_key = _lex_key(0, n)
    for j in range(1, 1 << code.k):
        row = rows[(j & -j).bit_length() - 1]
        flipped = cur & row
        turned_on = row ^ flipped
        d = turned_on
        while d:
            lsb = d & -d
            set_sum += llr_list[lsb.bit_length() - 1]
            d ^= lsb
        d = flipped
        while d:
            lsb = d & -d
            set_sum -= llr_list[lsb.bit_length() - 1]
            d ^= lsb
        cur ^= row
        corr = total - 2.0 * set_sum
        if corr > best_corr:
            best_corr, best_cw, best_key = corr, cur, None
        elif corr == best_corr:
            if best_key is None:
                best_key = _lex_key(best_cw, n)
            key = _lex_key(cur, n)
            if key < best_key:
                best_cw, best_key = cur, key
    return _int_to_bits(best_cw, n), best_corr


# ---------------------------------------------------------------------------
# ordered-statistics decoding

def osd_decode(code: LinearCode, received: ReceivedWord,
               order: int) -> MldDecision:
    """OSD with reprocessing of info-error patterns up to the given order."""
    if not 0 <= order <= code.k:
        raise CodeError(f"order {order} outside 0..k={code.k}")
    abs_llr = np.abs(received.llr)
    z_int = _bits_to_int(received.z)
    e_int, _ = _osd_core(code, abs_llr, z_int, order)
    e_bits = _int_to_bits(e_int, code.n)
    cw = received.z ^ e_bits
    correlation = float(np.dot(1.0 - 2.0 * cw, received.llr))
    pattern = ErrorPattern.from_bits(e_bits, abs_llr)
    return MldDecision(codeword=cw, error_pattern=pattern,
                       correlation=correlation)


def _osd_core(code: LinearCode, abs_llr: np.ndarray, z_int: int, order: int):
    """Int-packed OSD hot path. Returns (error_pattern_int, its w_L).

    Candidates are scored by the reliability-weight discrepancy
    sum(|L_i| : candidate_i != z_i), which orders them identically to the
    correlation metric.
    """
    k = code.k
    n = code.n
    # most reliable first; stable sort breaks |L| ties toward lower index
    col_order = np.argsort(-abs_llr, kind="stable")
    rows = list(code.G.row_ints)
    # Gauss-Jordan over columns in reliability order -> most reliable basis
    mrb = []
    used = 0
    for col in col_order:
        col = int(col)
        mask = 1 << col
        pivot = -1
        for i in range(used, k):
            if rows[i] & mask:
                pivot = i
                break
        if pivot < 0:
            continue  # dependent column; skip to the next most reliable
        rows[used], rows[pivot] = rows[pivot], rows[used]
        pr = rows[used]
        for i in range(k):
            if i != used and (rows[i] & mask):
                rows[i] ^= pr
        mrb.append(col)
        used += 1
        if used == k:
            break
    # re-encode the hard decision on the MRB
    c0 = 0
    for i, col in enumerate(mrb):
        if (z_int >> col) & 1:
            c0 ^= rows[i]
    absl = abs_llr.tolist()

    def wl_of(diff: int) -> float:
        total = 0.0
        while diff:
            lsb = diff & -diff
            total += absl[lsb.bit_length() - 1]
            diff ^= lsb
        return total

    diff0 = c0 ^ z_int
    best_diff = diff0
    best_wl = wl_of(diff0)
    best_key = None
    for t in range(1, order + 1):
        for comb in combinations(range(k), t):
            delta = 0
            for j in comb:
                delta ^= rows[j]
            diff = diff0 ^ delta
            wl = wl_of(diff)
            if wl < best_wl:
                best_wl, best_diff, best_key = wl, diff, None
            elif wl == best_wl and diff != best_diff:
                if best_key is None:
                    best_key = _lex_key(z_int ^ best_diff, n)
                key = _lex_key(z_int ^ diff, n)
                if key < best_key:
                    best_diff, best_key = diff, key
    return best_diff, best_wl
