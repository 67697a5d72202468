"""Reader for the code definition text format produced by the dataset
toolkit: n/k/dmin/name lines followed by one hex string per parity-check
row (LSB-first bit order)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Code:
    n: int
    k: int
    d_min: int
    name: str
    H: np.ndarray  # (n-k, n) uint8
    G: np.ndarray  # (k, n) uint8, systematic

    def syndrome_batch(self, z: np.ndarray) -> np.ndarray:
        return ((z.astype(np.uint32) @ self.H.T.astype(np.uint32)) & 1).astype(np.uint8)

    def encode_batch(self, infos: np.ndarray) -> np.ndarray:
        return ((infos.astype(np.uint32) @ self.G.astype(np.uint32)) & 1).astype(np.uint8)


def load_code(path) -> Code:
    fields = {}
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, val = line.partition("=")
                fields[key.strip()] = val.strip()
            else:
                rows.append(int(line, 16))
    n = int(fields["n"])
    k = int(fields["k"])
    d_min = int(fields["dmin"])
    name = fields.get("name", f"code_{n}_{k}")
    if len(rows) != n - k:
        raise ValueError(f"expected {n - k} parity rows, got {len(rows)}")
    H = np.zeros((n - k, n), dtype=np.uint8)
    for i, r in enumerate(rows):
        for j in range(n):
            H[i, j] = (r >> j) & 1
    # systematic [P^T | I] lets us reconstruct G = [I | P]
    if not np.array_equal(H[:, k:], np.eye(n - k, dtype=np.uint8)):
        raise ValueError("parity-check matrix is not in systematic [P^T | I] form")
    G = np.concatenate([np.eye(k, dtype=np.uint8), H[:, :k].T], axis=1)
    if ((G.astype(np.uint32) @ H.T.astype(np.uint32)) & 1).any():
        raise ValueError("reconstructed G does not satisfy G @ H^T = 0")
    return Code(n=n, k=k, d_min=d_min, name=name, H=H, G=G)
