"""Binary linear block codes.

Narrow-sense primitive BCH codes are built from a fixed table of primitive
polynomials so that G and H come out bit-exact on every run. Generator
matrices are kept in systematic form [I_k | P] with H = [P^T | I_{n-k}].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import Gf2Matrix, gauss_jordan_systematic, parity_mat_vec, pack_rows, solve_parity

# Fixed primitive polynomials (LSB-first coefficient bits). Pinning these
# makes the constructed G/H, and therefore every dataset, reproducible.
PRIMITIVE_POLY = {
    3: 0b1011,        # x^3 + x + 1
    4: 0b10011,       # x^4 + x + 1
    5: 0b100101,      # x^5 + x^2 + 1
    6: 0b1000011,     # x^6 + x + 1
    7: 0b10001001,    # x^7 + x^3 + 1
    8: 0b100011101,   # x^8 + x^4 + x^3 + x^2 + 1
}


class CodeError(Exception):
    """Invalid code parameters or malformed code definition data."""


class Gf2m:
    """GF(2^m) with exp/log tables over the fixed primitive polynomial."""

    def __init__(self, m: int):
        if m not in PRIMITIVE_POLY:
            raise CodeError(f"unsupported field degree m={m}; "
                            f"supported: {sorted(PRIMITIVE_POLY)}")
        self.m = m
        self.size = 1 << m
        poly = PRIMITIVE_POLY[m]
        exp = [0] * (self.size - 1)
        log = [0] * self.size
        x = 1
        for i in range(self.size - 1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.size:
                x ^= poly
        if x != 1:
            raise CodeError(f"polynomial for m={m} is not primitive")
        self.exp = exp
        self.log = log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[(self.log[a] + self.log[b]) % (self.size - 1)]

    def alpha_pow(self, e: int) -> int:
        return self.exp[e % (self.size - 1)]


def conjugacy_class(j: int, n: int) -> tuple:
    """Cyclotomic coset of j modulo n (n = 2^m - 1)."""
    seen = []
    c = j % n
    while c not in seen:
        seen.append(c)
        c = (c * 2) % n
    return tuple(sorted(seen))


def minimal_poly(field: Gf2m, j: int) -> int:
    """Minimal polynomial of alpha^j over GF(2), as LSB-first coefficient bits.

    Built by accumulating prod (x + alpha^c) over the conjugacy class of j;
    the result must collapse to binary coefficients.
    """
    n = field.size - 1
    coeffs = [1]  # polynomial "1", lowest degree first, over GF(2^m)
    for c in conjugacy_class(j, n):
        root = field.alpha_pow(c)
        nxt = [0] * (len(coeffs) + 1)
        for i, a in enumerate(coeffs):
            nxt[i + 1] ^= a            # x * a_i
            nxt[i] ^= field.mul(root, a)
        coeffs = nxt
    bits = 0
    for i, a in enumerate(coeffs):
        if a not in (0, 1):
            raise CodeError("minimal polynomial has non-binary coefficient")
        bits |= a << i
    return bits


def _poly_mul_gf2(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def bch_generator_poly(m: int, t: int) -> int:
    """Generator polynomial of the narrow-sense primitive BCH(m, t)."""
    field = Gf2m(m)
    n = field.size - 1
    done = set()
    g = 1
    for i in range(1, t + 1):
        j = 2 * i - 1
        cls = conjugacy_class(j, n)
        if cls in done:
            continue
        done.add(cls)
        g = _poly_mul_gf2(g, minimal_poly(field, j))
    return g


class LinearCode:
    """(n, k) binary linear code with systematic G = [I_k | P], H = [P^T | I]."""

    def __init__(self, n: int, k: int, d_min: int, G: Gf2Matrix, H: Gf2Matrix,
                 name: str):
        self.n = n
        self.k = k
        self.d_min = d_min
        self.G = G
        self.H = H
        self.name = name
        if G.rows != k or G.cols != n or H.rows != n - k or H.cols != n:
            raise CodeError("matrix dimensions inconsistent with (n, k)")
        if not G.mul(H.transpose()).is_zero():
            raise CodeError("G @ H^T != 0")
        if G.rank() != k:
            raise CodeError("generator matrix is rank-deficient")
        if H.rank() != n - k:
            raise CodeError("parity-check matrix is rank-deficient")

    def __repr__(self):
        return f"LinearCode({self.name}: n={self.n}, k={self.k}, d_min={self.d_min})"

    def encode(self, info: np.ndarray) -> np.ndarray:
        """info @ G; systematic, so the first k bits equal info."""
        info = np.asarray(info, dtype=np.uint8)
        if info.shape != (self.k,):
            raise CodeError(f"info length {info.shape} != k={self.k}")
        return (info.astype(np.uint32) @ self.G.dense.astype(np.uint32) & 1).astype(np.uint8)

    def encode_batch(self, infos: np.ndarray) -> np.ndarray:
        infos = np.asarray(infos, dtype=np.uint8)
        if infos.ndim != 2 or infos.shape[1] != self.k:
            raise CodeError(f"info batch shape {infos.shape} != (*, {self.k})")
        return ((infos.astype(np.uint32) @ self.G.dense.astype(np.uint32)) & 1).astype(np.uint8)

    def syndrome(self, z: np.ndarray) -> np.ndarray:
        """z @ H^T via the packed popcount-parity loop."""
        z = np.asarray(z, dtype=np.uint8)
        if z.shape != (self.n,):
            raise CodeError(f"word length {z.shape} != n={self.n}")
        return parity_mat_vec(self.H.words, pack_rows(z)[0])

    def syndrome_batch(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.uint8)
        if Z.ndim != 2 or Z.shape[1] != self.n:
            raise CodeError(f"word batch shape {Z.shape} != (*, {self.n})")
        return ((Z.astype(np.uint32) @ self.H.dense.T.astype(np.uint32)) & 1).astype(np.uint8)


def bch_code(m: int, t: int) -> LinearCode:
    """Narrow-sense primitive BCH code of length 2^m - 1, designed distance 2t+1."""
    if m not in PRIMITIVE_POLY:
        raise CodeError(f"unsupported field degree m={m}; "
                        f"supported: {sorted(PRIMITIVE_POLY)}")
    n = (1 << m) - 1
    if t < 1 or 2 * t + 1 > n:
        raise CodeError(f"no narrow-sense BCH with m={m}, t={t}")
    g = bch_generator_poly(m, t)
    k = n - (g.bit_length() - 1)
    if k <= 0:
        raise CodeError(f"degenerate BCH (k={k}) for m={m}, t={t}")
    rows = [g << i for i in range(k)]
    reduced, perm = gauss_jordan_systematic(rows, n)
    d_min = 2 * t + 1
    name = f"BCH_{n}_{k}_{d_min}"
    if perm is not None:
        name += "_perm" + "-".join(str(p) for p in perm)
    return _code_from_systematic_rows(n, k, d_min, reduced, name)


def _code_from_systematic_rows(n, k, d_min, g_rows, name) -> LinearCode:
    G = Gf2Matrix.from_row_ints(g_rows, n)
    P = G.dense[:, k:]
    H = Gf2Matrix.from_dense(
        np.concatenate([P.T, np.eye(n - k, dtype=np.uint8)], axis=1))
    return LinearCode(n, k, d_min, G, H, name)


def min_distance_exhaustive(code: LinearCode, k_limit: int = 24) -> int:
    """Minimum weight over all nonzero codewords, by Gray-code enumeration."""
    if code.k > k_limit:
        raise CodeError(f"k={code.k} exceeds enumeration bound {k_limit}")
    rows = code.G.row_ints
    cur = 0
    best = code.n + 1
    for j in range(1, 1 << code.k):
        cur ^= rows[(j & -j).bit_length() - 1]
        w = cur.bit_count()
        if w < best:
            best = w
    return best


def coset_representative(code: LinearCode, s: np.ndarray) -> np.ndarray:
    """Any word whose syndrome equals s."""
    s = np.asarray(s, dtype=np.uint8)
    if s.shape != (code.n - code.k,):
        raise CodeError(f"syndrome length {s.shape} != n-k={code.n - code.k}")
    return solve_parity(code.H.row_ints, code.n, s.tolist())


def save_code_file(code: LinearCode, path) -> None:
    """Text export: n/k/dmin/name lines, then one hex string per H row.

    Hex rows encode the LSB-first row integer (bit j == column j), zero
    padded to ceil(n/4) digits.
    """
    width = (code.n + 3) // 4
    lines = [f"n={code.n}", f"k={code.k}", f"dmin={code.d_min}",
             f"name={code.name}"]
    lines += [format(r, f"0{width}x") for r in code.H.row_ints]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_code_file(path) -> LinearCode:
    fields = {}
    hex_rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, val = line.partition("=")
                fields[key.strip()] = val.strip()
            else:
                hex_rows.append(line)
    try:
        n = int(fields["n"])
        k = int(fields["k"])
        d_min = int(fields["dmin"])
    except KeyError as exc:
        raise CodeError(f"code file missing field {exc}") from exc
    name = fields.get("name", f"code_{n}_{k}")
    if len(hex_rows) != n - k:
        raise CodeError(f"expected {n - k} parity rows, found {len(hex_rows)}")
    h_rows = [int(row, 16) for row in hex_rows]
    H = Gf2Matrix.from_row_ints(h_rows, n)
    # our exports are always systematic [P^T | I]; rebuild G from that form
    right = H.dense[:, k:]
    if not np.array_equal(right, np.eye(n - k, dtype=np.uint8)):
        raise CodeError("parity-check matrix is not in systematic [P^T | I] form")
    P = H.dense[:, :k].T
    G = Gf2Matrix.from_dense(
        np.concatenate([np.eye(k, dtype=np.uint8), P], axis=1))
    return LinearCode(n, k, d_min, G, H, name)


@dataclass(frozen=True)
class NamedCode:
    """Convenience constructor args for the BCH codes used in experiments."""
    m: int
    t: int


WELL_KNOWN = {
    "BCH_31_21_5": NamedCode(5, 2),
    "BCH_15_7_5": NamedCode(4, 2),
    "BCH_63_51_5": NamedCode(6, 2),
    "BCH_63_45_7": NamedCode(6, 3),
    "BCH_63_57_3": NamedCode(6, 1),
    "BCH_7_4_3": NamedCode(3, 1),
}
