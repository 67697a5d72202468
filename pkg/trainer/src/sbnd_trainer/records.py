"""Reader for the binary dataset files (69-byte little-endian header + fixed
size records). Implemented independently of the generator toolkit; only the
on-disk layout is shared."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

_HEADER = struct.Struct("<4sHHHHHfBBBQ32sQ")
MAGIC = b"SBND"
FLAG_STORE_CHAN = 0x0001
TARGET_CHAN = 0
TARGET_ML = 1


@dataclass
class Header:
    n: int
    k: int
    d_min: int
    snr_db: float
    target_kind: int
    method: int
    w_max: int
    record_count: int
    code_name: str
    master_seed: int
    flags: int


@dataclass
class RecordArrays:
    """Whole dataset as column arrays (records are a few hundred bytes)."""

    header: Header
    reliab: np.ndarray    # (N, n) float32
    z: np.ndarray         # (N, n) uint8
    s: np.ndarray         # (N, n-k) uint8
    e_target: np.ndarray  # (N, n) uint8
    e_chan: np.ndarray | None


def load_dataset(path) -> RecordArrays:
    with open(path, "rb") as fh:
        head_raw = fh.read(_HEADER.size)
        (magic, version, flags, n, k, d_min, snr_db, target_kind, method,
         w_max, count, code_name, master_seed) = _HEADER.unpack(head_raw)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != 1:
            raise ValueError(f"unsupported dataset version {version}")
        header = Header(n=n, k=k, d_min=d_min, snr_db=snr_db,
                        target_kind=target_kind, method=method, w_max=w_max,
                        record_count=count,
                        code_name=code_name.rstrip(b"\x00").decode("ascii"),
                        master_seed=master_seed, flags=flags)
        zb = (n + 7) // 8
        sb = (n - k + 7) // 8
        rec_size = 4 * n + 2 * zb + sb + (zb if flags & FLAG_STORE_CHAN else 0)
        raw = np.fromfile(fh, dtype=np.uint8)
    if raw.size != count * rec_size:
        raise ValueError(f"file holds {raw.size} record bytes, expected "
                         f"{count} x {rec_size}")
    raw = raw.reshape(count, rec_size)

    def bits(col0, nbytes, width):
        return np.unpackbits(raw[:, col0:col0 + nbytes], axis=1,
                             bitorder="little")[:, :width]

    off = 4 * n
    reliab = raw[:, :off].copy().view("<f4")
    z = bits(off, zb, n)
    s = bits(off + zb, sb, n - k)
    e_target = bits(off + zb + sb, zb, n)
    e_chan = None
    if flags & FLAG_STORE_CHAN:
        e_chan = bits(off + 2 * zb + sb, zb, n)
    return RecordArrays(header=header, reliab=reliab, z=z, s=s,
                        e_target=e_target, e_chan=e_chan)
