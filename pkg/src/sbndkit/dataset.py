"""Fixed training-set construction and the bit-exact dataset file format.

A dataset file is a 69-byte little-endian header followed by fixed-size
records. Each record stores the normalized reliabilities (f32), the hard
decision z, the syndrome s, the training target e, and optionally the true
channel error pattern e_chan, all bit-packed LSB-first.

Four construction methods shape the weight/syndrome distribution:
  1 chan   — keep decoder outputs as they come (reference)
  2 uni-w  — exact per-weight quotas for w in 1..w_max
  3 is     — weight-biased channel input, outputs kept as they come
  4 uni-s  — exact per-syndrome quotas over all nonzero syndromes

Generation consumes a deterministic stream of fixed-size channel chunks
(stream id = chunk index), so the output bytes are independent of how many
workers computed the chunks.
"""

from __future__ import annotations

import csv
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel as ch
from .channel import ChannelParams, NoiseWeightDistribution
from .codes import LinearCode
from .mld import _bits_to_int, _int_to_bits, _osd_core, default_order

MAGIC = b"SBND"
VERSION = 1
FLAG_STORE_CHAN = 0x0001

TARGET_CHAN = 0
TARGET_ML = 1

METHOD_CHAN = 1
METHOD_UNIFORM_WEIGHT = 2
METHOD_IMPORTANCE = 3
METHOD_UNIFORM_SYNDROME = 4

_HEADER = struct.Struct("<4sHHHHHfBBBQ32sQ")


class DatasetError(Exception):
    """Corrupt file, invariant violation, or invalid build request."""


class StarvationError(DatasetError):
    """A quota bucket could not be filled within the attempts budget."""


@dataclass
class DatasetHeader:
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
    flags: int = 0
    version: int = VERSION

    @property
    def store_chan(self) -> bool:
        return bool(self.flags & FLAG_STORE_CHAN)

    @property
    def record_size(self) -> int:
        zb = (self.n + 7) // 8
        sb = (self.n - self.k + 7) // 8
        return 4 * self.n + zb + sb + zb + (zb if self.store_chan else 0)

    def pack(self) -> bytes:
        return _HEADER.pack(MAGIC, self.version, self.flags, self.n, self.k,
                            self.d_min, self.snr_db, self.target_kind,
                            self.method, self.w_max, self.record_count,
                            self.code_name.encode("ascii")[:32],
                            self.master_seed)

    @classmethod
    def unpack(cls, raw: bytes) -> "DatasetHeader":
        if len(raw) < _HEADER.size:
            raise DatasetError(f"header truncated: {len(raw)} < {_HEADER.size} bytes")
        (magic, version, flags, n, k, d_min, snr_db, target_kind, method,
         w_max, record_count, code_name, master_seed) = _HEADER.unpack(
            raw[:_HEADER.size])
        if magic != MAGIC:
            raise DatasetError(f"bad magic {magic!r}")
        if version != VERSION:
            raise DatasetError(f"unsupported version {version}")
        return cls(n=n, k=k, d_min=d_min, snr_db=snr_db,
                   target_kind=target_kind, method=method, w_max=w_max,
                   record_count=record_count,
                   code_name=code_name.rstrip(b"\x00").decode("ascii"),
                   master_seed=master_seed, flags=flags, version=version)


HEADER_SIZE = _HEADER.size


@dataclass
class DatasetRecord:
    reliab_norm: np.ndarray
    z: np.ndarray
    s: np.ndarray
    e_target: np.ndarray
    e_chan: np.ndarray | None = None


def _pack_bits(bits: np.ndarray) -> bytes:
    return np.packbits(bits, bitorder="little").tobytes()


def pack_record(header: DatasetHeader, rec: DatasetRecord) -> bytes:
    parts = [rec.reliab_norm.astype("<f4").tobytes(),
             _pack_bits(rec.z), _pack_bits(rec.s), _pack_bits(rec.e_target)]
    if header.store_chan:
        parts.append(_pack_bits(rec.e_chan))
    return b"".join(parts)


def unpack_record(header: DatasetHeader, raw: bytes) -> DatasetRecord:
    n, k = header.n, header.k
    zb = (n + 7) // 8
    sb = (n - k + 7) // 8
    off = 4 * n
    reliab = np.frombuffer(raw[:off], dtype="<f4").astype(np.float32)

    def bits(nbytes, count):
        nonlocal off
        out = np.unpackbits(np.frombuffer(raw[off:off + nbytes], dtype=np.uint8),
                            bitorder="little")[:count]
        off += nbytes
        return out

    z = bits(zb, n)
    s = bits(sb, n - k)
    e_target = bits(zb, n)
    e_chan = bits(zb, n) if header.store_chan else None
    return DatasetRecord(reliab_norm=reliab, z=z, s=s, e_target=e_target,
                         e_chan=e_chan)


def read_dataset(path):
    """Return (header, record iterator). Validates magic, version, length."""
    fh = open(path, "rb")
    header = DatasetHeader.unpack(fh.read(HEADER_SIZE))
    import os
    size = os.fstat(fh.fileno()).st_size
    expect = HEADER_SIZE + header.record_count * header.record_size
    if size != expect:
        fh.close()
        raise DatasetError(f"file length {size} != expected {expect} "
                           f"({header.record_count} records of "
                           f"{header.record_size} bytes + {HEADER_SIZE})")

    def records():
        with fh:
            for _ in range(header.record_count):
                raw = fh.read(header.record_size)
                yield unpack_record(header, raw)

    return header, records()


def validate_dataset(path, code: LinearCode | None = None) -> dict:
    """Full invariant re-check; raises DatasetError naming the bad record."""
    header, records = read_dataset(path)
    syn_counts = {}
    for idx, rec in enumerate(records):
        if not rec.s.any():
            raise DatasetError(f"record {idx}: zero syndrome")
        if rec.reliab_norm.max() != 1.0:
            raise DatasetError(f"record {idx}: reliab_norm max != 1")
        if code is not None:
            if not np.array_equal(code.syndrome(rec.z), rec.s):
                raise DatasetError(f"record {idx}: syndrome(z) != s")
            # either target kind: z ^ e_target is the decoded/true codeword
            if code.syndrome(rec.z ^ rec.e_target).any():
                raise DatasetError(f"record {idx}: z ^ e_target not a codeword")
            if rec.e_chan is not None and code.syndrome(rec.z ^ rec.e_chan).any():
                raise DatasetError(f"record {idx}: z ^ e_chan not a codeword")
        key = _bits_to_int(rec.s)
        syn_counts[key] = syn_counts.get(key, 0) + 1
    if header.method == METHOD_UNIFORM_SYNDROME:
        counts = set(syn_counts.values())
        full = (1 << (header.n - header.k)) - 1
        if len(syn_counts) != full or len(counts) != 1:
            raise DatasetError("method-4 syndrome occupancy is not uniform: "
                               f"{len(syn_counts)} syndromes, counts {sorted(counts)[:5]}...")
    return {"records": header.record_count, "syndromes": len(syn_counts)}


# ---------------------------------------------------------------------------
# building

@dataclass
class BuildSpec:
    code: LinearCode
    params: ChannelParams
    method: int
    target_kind: int
    record_count: int
    master_seed: int
    w_max: int = 0                      # methods 2/3; 0 = use d_min-derived default
    input_pmf: NoiseWeightDistribution | None = None  # method 3
    store_chan: bool = False
    chunk_size: int = 4096
    max_attempts: int = 0               # 0 = 10_000 x record_count transmissions

    def __post_init__(self):
        if self.method not in (METHOD_CHAN, METHOD_UNIFORM_WEIGHT,
                               METHOD_IMPORTANCE, METHOD_UNIFORM_SYNDROME):
            raise DatasetError(f"unknown method {self.method}")
        if self.target_kind not in (TARGET_CHAN, TARGET_ML):
            raise DatasetError(f"unknown target kind {self.target_kind}")
        if self.record_count < 1:
            raise DatasetError("record_count must be >= 1")
        if self.method == METHOD_UNIFORM_WEIGHT and self.effective_w_max < 1:
            raise DatasetError("method 2 needs w_max >= 1")
        if self.method == METHOD_UNIFORM_SYNDROME:
            if self.record_count < (1 << (self.code.n - self.code.k)) - 1:
                raise DatasetError("method 4 needs record_count >= number of "
                                   "nonzero syndromes")

    @property
    def effective_w_max(self) -> int:
        if self.w_max:
            return self.w_max
        if self.method == METHOD_UNIFORM_WEIGHT:
            return self.code.d_min - 1
        return self.code.d_min

    @property
    def effective_input_pmf(self) -> NoiseWeightDistribution:
        if self.input_pmf is not None:
            return self.input_pmf
        return NoiseWeightDistribution.uniform_weights(
            1, self.effective_w_max, self.code.n)

    @property
    def attempts_budget(self) -> int:
        return self.max_attempts or 10_000 * self.record_count

    def header(self, record_count: int) -> DatasetHeader:
        w_max = 0
        if self.method == METHOD_UNIFORM_WEIGHT:
            w_max = self.effective_w_max
        elif self.method == METHOD_IMPORTANCE and self.input_pmf is None:
            w_max = self.effective_w_max  # records the default pmf support
        return DatasetHeader(
            n=self.code.n, k=self.code.k, d_min=self.code.d_min,
            snr_db=self.params.ebn0_db, target_kind=self.target_kind,
            method=self.method, w_max=w_max, record_count=record_count,
            code_name=self.code.name, master_seed=self.master_seed,
            flags=FLAG_STORE_CHAN if self.store_chan else 0)


@dataclass
class BuildReport:
    records_written: int
    transmissions: int
    weight_hist: np.ndarray
    bucket_counts: dict = field(default_factory=dict)

    @property
    def weight_fractions(self) -> np.ndarray:
        total = self.weight_hist.sum()
        return self.weight_hist / total if total else self.weight_hist


def _gen_chunk(code, params, method, input_pmf, master_seed, chunk_idx,
               chunk_size):
    """Pure function: chunk index -> kept (nonzero-syndrome) channel rows."""
    rng = ch.stream_rng(master_seed, ch.DOMAIN_BUILD, chunk_idx)
    if method == METHOD_IMPORTANCE:
        out = ch.transmit_biased_zero_batch(code, params, input_pmf, rng,
                                            chunk_size)
    else:
        out = ch.transmit_zero_batch(code, params, rng, chunk_size)
    keep = out["nonzero_syndrome"]
    return {
        "reliab_norm": out["reliab_norm"][keep].astype(np.float32),
        "abs_llr": np.abs(out["llr"][keep]),
        "z": out["z"][keep],
        "s": out["s"][keep],
    }


class _MethodState:
    """Sequential accept/registration logic shared by the four methods."""

    def __init__(self, spec: BuildSpec):
        self.spec = spec
        code = spec.code
        self.total_goal = spec.record_count
        self.buckets = None
        if spec.method == METHOD_UNIFORM_WEIGHT:
            w_max = spec.effective_w_max
            base, rem = divmod(spec.record_count, w_max)
            self.quota = {w: base + (1 if w <= rem else 0)
                          for w in range(1, w_max + 1)}
            self.buckets = {w: 0 for w in self.quota}
        elif spec.method == METHOD_UNIFORM_SYNDROME:
            n_syn = (1 << (code.n - code.k)) - 1
            q = spec.record_count // n_syn
            self.quota = q
            self.counts = np.zeros(n_syn + 1, dtype=np.int64)
            self.total_goal = q * n_syn

    def syndrome_wanted(self, s_int: int) -> bool:
        if self.spec.method == METHOD_UNIFORM_SYNDROME:
            return self.counts[s_int] < self.quota
        return True

    def accept(self, s_int: int, target_weight: int) -> bool:
        m = self.spec.method
        if m in (METHOD_CHAN, METHOD_IMPORTANCE):
            return True
        if m == METHOD_UNIFORM_WEIGHT:
            got = self.buckets.get(target_weight)
            if got is None or got >= self.quota[target_weight]:
                return False
            self.buckets[target_weight] = got + 1
            return True
        self.counts[s_int] += 1
        return True

    @property
    def done_after(self) -> bool:
        # callers track the running total; this reports bucket exhaustion
        if self.spec.method == METHOD_UNIFORM_WEIGHT:
            return all(self.buckets[w] >= self.quota[w] for w in self.quota)
        return False

    def progress_report(self) -> str:
        if self.spec.method == METHOD_UNIFORM_WEIGHT:
            return ", ".join(f"w={w}: {self.buckets[w]}/{self.quota[w]}"
                             for w in sorted(self.quota))
        if self.spec.method == METHOD_UNIFORM_SYNDROME:
            lag = int((self.counts[1:] < self.quota).sum())
            return (f"{lag} of {len(self.counts) - 1} syndrome buckets below "
                    f"quota {self.quota}; min occupancy {int(self.counts[1:].min())}")
        return ""


def build_dataset(spec: BuildSpec, out_path, workers: int = 1,
                  stats_path=None) -> BuildReport:
    """Generate a dataset file (plus sidecar weight-histogram CSV)."""
    code = spec.code
    state = _MethodState(spec)
    header = spec.header(state.total_goal)
    need_ml = spec.target_kind == TARGET_ML
    order = default_order(code)
    input_pmf = spec.effective_input_pmf if spec.method == METHOD_IMPORTANCE else None

    weight_hist = np.zeros(code.n + 1, dtype=np.int64)
    written = 0
    transmissions = 0

    def label(abs_llr, z_bits, z_int):
        """ML target with the generating codeword kept in the candidate set."""
        e_int, wl = _osd_core(code, abs_llr, z_int, order)
        # all-zero codeword generated the data, so z itself is a valid coset
        # pattern; take it when it beats the OSD survivor (exact ML bound).
        # On a w_L tie z also wins: its codeword 0 is the lexicographic minimum.
        wl_chan = float(abs_llr[z_bits == 1].sum())
        if wl_chan <= wl:
            return z_int
        return e_int

    try:
        with open(out_path, "wb") as fh:
            fh.write(header.pack())
            chunk_args = (code, spec.params, spec.method, input_pmf,
                          spec.master_seed, spec.chunk_size)
            for chunk in _chunk_stream(chunk_args, workers):
                rows = len(chunk["z"])
                transmissions += spec.chunk_size
                for i in range(rows):
                    z_bits = chunk["z"][i]
                    s_int = _bits_to_int(chunk["s"][i])
                    if not state.syndrome_wanted(s_int):
                        continue
                    abs_llr = chunk["abs_llr"][i]
                    z_int = _bits_to_int(z_bits)
                    if need_ml:
                        e_int = label(abs_llr, z_bits, z_int)
                        e_bits = _int_to_bits(e_int, code.n)
                    else:
                        e_bits = z_bits  # all-zero codeword: e_chan == z
                    w = int(e_bits.sum())
                    if not state.accept(s_int, w):
                        continue
                    rec = DatasetRecord(
                        reliab_norm=chunk["reliab_norm"][i],
                        z=z_bits, s=chunk["s"][i], e_target=e_bits,
                        e_chan=z_bits if spec.store_chan else None)
                    fh.write(pack_record(header, rec))
                    weight_hist[w] += 1
                    written += 1
                    if written >= state.total_goal:
                        break
                if written >= state.total_goal:
                    break
                if transmissions >= spec.attempts_budget:
                    raise StarvationError(
                        f"attempts budget {spec.attempts_budget} exhausted "
                        f"after {written}/{state.total_goal} records; "
                        + state.progress_report())
    except Exception:
        import os
        if os.path.exists(out_path):
            os.unlink(out_path)  # never leave a truncated dataset behind
        raise

    report = BuildReport(records_written=written, transmissions=transmissions,
                         weight_hist=weight_hist)
    if spec.method == METHOD_UNIFORM_WEIGHT:
        report.bucket_counts = dict(state.buckets)
    elif spec.method == METHOD_UNIFORM_SYNDROME:
        report.bucket_counts = {"quota": state.quota}
    if stats_path is not None:
        write_weight_csv(weight_hist, stats_path)
    return report


def _chunk_stream(chunk_args, workers: int):
    """Yield chunks in index order; workers only affect who computes them."""
    code, params, method, input_pmf, master_seed, chunk_size = chunk_args
    if workers <= 1:
        idx = 0
        while True:
            yield _gen_chunk(code, params, method, input_pmf, master_seed,
                             idx, chunk_size)
            idx += 1
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pending = {}
            next_submit = 0
            next_yield = 0
            while True:
                while next_submit < next_yield + 2 * workers:
                    pending[next_submit] = pool.submit(
                        _gen_chunk, code, params, method, input_pmf,
                        master_seed, next_submit, chunk_size)
                    next_submit += 1
                yield pending.pop(next_yield).result()
                next_yield += 1


# thin named wrappers matching the four construction methods

def build_method1_chan(spec: BuildSpec, out_path, **kw) -> BuildReport:
    assert spec.method == METHOD_CHAN
    return build_dataset(spec, out_path, **kw)


def build_method2_uniform_weight(spec: BuildSpec, out_path, **kw) -> BuildReport:
    assert spec.method == METHOD_UNIFORM_WEIGHT
    return build_dataset(spec, out_path, **kw)


def build_method3_importance(spec: BuildSpec, out_path, **kw) -> BuildReport:
    assert spec.method == METHOD_IMPORTANCE
    return build_dataset(spec, out_path, **kw)


def build_method4_uniform_syndrome(spec: BuildSpec, out_path, **kw) -> BuildReport:
    assert spec.method == METHOD_UNIFORM_SYNDROME
    return build_dataset(spec, out_path, **kw)


# ---------------------------------------------------------------------------
# statistics

@dataclass
class DatasetStats:
    weight_hist: np.ndarray
    syndrome_hist: dict
    wl_mean: float
    wl_min: float
    wl_max: float


def dataset_stats(path) -> DatasetStats:
    """Single-pass weight/syndrome histograms and normalized-w_L summary."""
    header, records = read_dataset(path)
    weight_hist = np.zeros(header.n + 1, dtype=np.int64)
    syn_hist = {}
    wl_sum = 0.0
    wl_min = float("inf")
    wl_max = 0.0
    for rec in records:
        w = int(rec.e_target.sum())
        weight_hist[w] += 1
        key = _bits_to_int(rec.s)
        syn_hist[key] = syn_hist.get(key, 0) + 1
        wl = float(rec.reliab_norm[rec.e_target == 1].sum())
        wl_sum += wl
        wl_min = min(wl_min, wl)
        wl_max = max(wl_max, wl)
    count = max(1, int(weight_hist.sum()))
    return DatasetStats(weight_hist=weight_hist, syndrome_hist=syn_hist,
                        wl_mean=wl_sum / count,
                        wl_min=0.0 if wl_min == float("inf") else wl_min,
                        wl_max=wl_max)


def write_weight_csv(weight_hist: np.ndarray, path) -> None:
    total = max(1, int(weight_hist.sum()))
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["weight", "count", "fraction"])
        for w, c in enumerate(weight_hist):
            out.writerow([w, int(c), repr(int(c) / total)])


def write_syndrome_csv(syn_hist: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["syndrome", "count"])
        for key in sorted(syn_hist):
            out.writerow([key, syn_hist[key]])
