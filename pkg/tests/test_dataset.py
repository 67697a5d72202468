import numpy as np
import pytest

from sbndkit.channel import ChannelParams, NoiseWeightDistribution
from sbndkit.dataset import (FLAG_STORE_CHAN, HEADER_SIZE, METHOD_CHAN,
                             METHOD_IMPORTANCE, METHOD_UNIFORM_SYNDROME,
                             METHOD_UNIFORM_WEIGHT, TARGET_CHAN, TARGET_ML,
                             BuildSpec, DatasetError, DatasetHeader,
                             StarvationError, build_dataset, dataset_stats,
                             read_dataset, validate_dataset, write_weight_csv)


@pytest.fixture(scope="module")
def m1_file(tmp_path_factory, bch31, params31_3db):
    path = tmp_path_factory.mktemp("ds") / "m1.bin"
    spec = BuildSpec(code=bch31, params=params31_3db, method=METHOD_CHAN,
                     target_kind=TARGET_ML, record_count=3000, master_seed=42,
                     store_chan=True)
    report = build_dataset(spec, path)
    return path, spec, report


def test_header_roundtrip():
    h = DatasetHeader(n=31, k=21, d_min=5, snr_db=3.0, target_kind=TARGET_ML,
                      method=METHOD_CHAN, w_max=0, record_count=1234,
                      code_name="BCH_31_21_5", master_seed=99,
                      flags=FLAG_STORE_CHAN)
    raw = h.pack()
    assert len(raw) == HEADER_SIZE == 69
    h2 = DatasetHeader.unpack(raw)
    assert h2 == h


def test_header_rejects_garbage():
    with pytest.raises(DatasetError):
        DatasetHeader.unpack(b"XXXX" + b"\x00" * 65)
    with pytest.raises(DatasetError):
        DatasetHeader.unpack(b"\x00" * 10)


def test_method1_build_and_roundtrip(m1_file, bch31):
    path, spec, report = m1_file
    header, records = read_dataset(path)
    assert header.record_count == 3000
    assert header.code_name == "BCH_31_21_5"
    assert header.store_chan
    count = 0
    for rec in records:
        assert rec.s.any()
        assert np.array_equal(bch31.syndrome(rec.z), rec.s)
        assert not bch31.syndrome(rec.z ^ rec.e_target).any()
        assert rec.reliab_norm.max() == 1.0
        # all-zero codeword: the stored channel pattern is the hard decision
        assert np.array_equal(rec.e_chan, rec.z)
        count += 1
    assert count == 3000
    assert report.weight_hist.sum() == 3000
    assert report.weight_hist[0] == 0


def test_method1_ml_beats_chan_reliability_weight(m1_file):
    path, _, _ = m1_file
    _, records = read_dataset(path)
    for rec in records:
        wl_ml = rec.reliab_norm.astype(np.float64)[rec.e_target == 1].sum()
        wl_chan = rec.reliab_norm.astype(np.float64)[rec.e_chan == 1].sum()
        # 1e-5 covers f32 storage quantization of the reliabilities
        assert wl_ml <= wl_chan + 1e-5


def test_method1_lowers_mean_weight(m1_file):
    # ML relabeling concentrates the weight distribution downward
    path, _, _ = m1_file
    _, records = read_dataset(path)
    w_ml = []
    w_chan = []
    for rec in records:
        w_ml.append(rec.e_target.sum())
        w_chan.append(rec.e_chan.sum())
    assert np.mean(w_ml) < np.mean(w_chan)


def test_bytes_identical_rebuild(m1_file, bch31, params31_3db, tmp_path):
    path, spec, _ = m1_file
    other = tmp_path / "again.bin"
    build_dataset(spec, other)
    assert other.read_bytes() == path.read_bytes()


def test_workers_do_not_change_bytes(bch31, params31_3db, tmp_path):
    spec = BuildSpec(code=bch31, params=params31_3db, method=METHOD_CHAN,
                     target_kind=TARGET_ML, record_count=500, master_seed=17)
    a = tmp_path / "w1.bin"
    b = tmp_path / "w2.bin"
    build_dataset(spec, a, workers=1)
    build_dataset(spec, b, workers=2)
    assert a.read_bytes() == b.read_bytes()


def test_truncated_file_reports_counts(m1_file, tmp_path):
    path, _, _ = m1_file
    raw = path.read_bytes()
    clipped = tmp_path / "short.bin"
    clipped.write_bytes(raw[:-7])
    with pytest.raises(DatasetError, match="length"):
        read_dataset(clipped)


def test_corrupt_record_detected(m1_file, bch31, tmp_path):
    path, _, _ = m1_file
    raw = bytearray(path.read_bytes())
    # smash the syndrome bytes of record 0 (after 31 f32 reliabilities + z)
    off = HEADER_SIZE + 31 * 4 + 4
    raw[off] ^= 0x3F
    bad = tmp_path / "corrupt.bin"
    bad.write_bytes(bytes(raw))
    with pytest.raises(DatasetError, match="record 0"):
        validate_dataset(bad, bch31)


def test_method2_exact_allocation(bch31, params31_3db, tmp_path):
    spec = BuildSpec(code=bch31, params=params31_3db,
                     method=METHOD_UNIFORM_WEIGHT, target_kind=TARGET_ML,
                     record_count=4000, master_seed=3)
    report = build_dataset(spec, tmp_path / "m2.bin")
    assert spec.effective_w_max == 4  # d_min - 1 default
    assert report.bucket_counts == {1: 1000, 2: 1000, 3: 1000, 4: 1000}
    stats = dataset_stats(tmp_path / "m2.bin")
    assert stats.weight_hist[1:5].tolist() == [1000] * 4
    assert stats.weight_hist[0] == 0
    assert stats.weight_hist[5:].sum() == 0


def test_method2_remainder_to_lowest_weights(bch31, params31_3db, tmp_path):
    spec = BuildSpec(code=bch31, params=params31_3db,
                     method=METHOD_UNIFORM_WEIGHT, target_kind=TARGET_ML,
                     record_count=10, master_seed=3)
    report = build_dataset(spec, tmp_path / "m2r.bin")
    assert report.bucket_counts == {1: 3, 2: 3, 3: 2, 4: 2}


def test_method2_starvation_reports_progress(bch31, params31_3db, tmp_path):
    spec = BuildSpec(code=bch31, params=params31_3db,
                     method=METHOD_UNIFORM_WEIGHT, target_kind=TARGET_ML,
                     record_count=4000, master_seed=3, max_attempts=2048,
                     chunk_size=1024)
    with pytest.raises(StarvationError, match="w=4"):
        build_dataset(spec, tmp_path / "starved.bin")
    assert not (tmp_path / "starved.bin").exists()


def test_method3_default_pmf_and_histogram(bch31, params31_3db, tmp_path):
    spec = BuildSpec(code=bch31, params=params31_3db,
                     method=METHOD_IMPORTANCE, target_kind=TARGET_ML,
                     record_count=2000, master_seed=4)
    assert np.allclose(spec.effective_input_pmf.pmf[1:6], 0.2)
    stats_path = tmp_path / "m3.csv"
    report = build_dataset(spec, tmp_path / "m3.bin", stats_path=stats_path)
    assert report.records_written == 2000
    # realized fractions sum to one in the sidecar
    rows = stats_path.read_text().strip().splitlines()[1:]
    fracs = [float(r.split(",")[2]) for r in rows]
    assert sum(fracs) == pytest.approx(1.0, abs=1e-9)


def test_method3_point_mass_zero_starves(bch31, params31_3db, tmp_path):
    spec = BuildSpec(code=bch31, params=params31_3db,
                     method=METHOD_IMPORTANCE, target_kind=TARGET_ML,
                     record_count=100, master_seed=4,
                     input_pmf=NoiseWeightDistribution.point_mass(0, 31),
                     max_attempts=4096)
    with pytest.raises(StarvationError):
        build_dataset(spec, tmp_path / "never.bin")


def test_method4_uniform_syndrome(bch15, tmp_path):
    params = ChannelParams.for_code(bch15, 3.0)
    n_syn = (1 << 8) - 1
    spec = BuildSpec(code=bch15, params=params,
                     method=METHOD_UNIFORM_SYNDROME, target_kind=TARGET_ML,
                     record_count=3 * n_syn + 17, master_seed=5)
    path = tmp_path / "m4.bin"
    report = build_dataset(spec, path)
    assert report.records_written == 3 * n_syn  # floor(count / n_syn) each
    info = validate_dataset(path, bch15)
    assert info["syndromes"] == n_syn
    stats = dataset_stats(path)
    assert set(stats.syndrome_hist.values()) == {3}
    assert 0 not in stats.syndrome_hist


def test_method4_requires_enough_records(bch31, params31_3db):
    with pytest.raises(DatasetError):
        BuildSpec(code=bch31, params=params31_3db,
                  method=METHOD_UNIFORM_SYNDROME, target_kind=TARGET_ML,
                  record_count=1000, master_seed=5)


def test_target_chan_records(bch31, params31_3db, tmp_path):
    spec = BuildSpec(code=bch31, params=params31_3db, method=METHOD_CHAN,
                     target_kind=TARGET_CHAN, record_count=400, master_seed=6)
    path = tmp_path / "chan.bin"
    build_dataset(spec, path)
    _, records = read_dataset(path)
    for rec in records:
        assert np.array_equal(rec.e_target, rec.z)  # e_chan for c = 0


def test_stats_csv_format(tmp_path):
    hist = np.array([0, 5, 3, 2])
    path = tmp_path / "w.csv"
    write_weight_csv(hist, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "weight,count,fraction"
    assert lines[1].startswith("0,0,")
    assert lines[2].startswith("1,5,0.5")


def test_method4_quota_arithmetic_at_full_scale(bch31, params31_3db):
    # pure arithmetic: 4,092,000 requested records over 1023 syndromes
    from sbndkit.dataset import _MethodState
    spec = BuildSpec(code=bch31, params=params31_3db,
                     method=METHOD_UNIFORM_SYNDROME, target_kind=TARGET_ML,
                     record_count=4_092_000, master_seed=0)
    state = _MethodState(spec)
    assert state.quota == 4000
    assert state.total_goal == 4000 * 1023 == 4_092_000
