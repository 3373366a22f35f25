import numpy as np
import pytest

from lerf import ConfigError, save_image
from lerf.bench import (
    bench_run,
    format_table,
    parse_tasks,
    run_task,
    warp_bench_run,
    write_csv,
)
from lerf.kernels import aniso_gaussian, keys_cubic, linear
from lerf.lut import make_constant_bank

from conftest import smooth_image


@pytest.fixture
def tiny_dataset(tmp_path):
    d = tmp_path / "imgs"
    d.mkdir()
    for i in range(2):
        save_image(smooth_image(i, 36, 40), d / f"img{i}.png")
    return d


def test_identity_task_caps(tiny_dataset):
    report = bench_run(tiny_dataset, [(1.0, 1.0)], keys_cubic())
    assert all(r.psnr_y == 100.0 for r in report.records)
    assert all(r.mpsnr == 100.0 for r in report.records)
    assert all(r.valid_fraction == 1.0 for r in report.records)
    assert report.task_means["1x1"]["psnr_y"] == 100.0


def test_means_recomputable_from_records(tiny_dataset):
    report = bench_run(tiny_dataset, [(2.0, 2.0), (1.5, 2.0)], linear())
    for task, m in report.task_means.items():
        rows = [r for r in report.records if r.task == task]
        assert abs(np.mean([r.psnr_y for r in rows]) - m["psnr_y"]) < 1e-9
        assert abs(np.mean([r.ssim for r in rows]) - m["ssim"]) < 1e-9
        assert m["n"] == 2


def test_adaptive_kernel_in_bench(tiny_dataset):
    bank = make_constant_bank(aniso_gaussian(), [0.0, 1.0, 1.0])
    report = bench_run(tiny_dataset, [(2.0, 2.0)], aniso_gaussian(), bank=bank)
    assert report.config["bank"] is not None
    assert all(np.isfinite(r.psnr_y) for r in report.records)


def test_csv_schema(tiny_dataset, tmp_path):
    report = bench_run(tiny_dataset, [(2.0, 2.0)], keys_cubic())
    out = tmp_path / "r.csv"
    write_csv(report, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "image,task,psnr_y,mpsnr,ssim,valid_fraction"
    assert len(lines) == 1 + len(report.records)
    assert format_table(report)


def test_parse_tasks():
    assert parse_tasks("2.0x2.0, 1.5x2.4") == [(2.0, 2.0), (1.5, 2.4)]
    with pytest.raises(ConfigError):
        parse_tasks("2.0")
    with pytest.raises(ConfigError):
        parse_tasks("")


def test_run_task_rejects_downscale(tiny_dataset):
    img = smooth_image(0, 24, 24)
    with pytest.raises(ConfigError):
        run_task(img, 0.5, 0.5, keys_cubic())


def test_empty_dataset_raises(tmp_path):
    (tmp_path / "empty").mkdir()
    with pytest.raises(ConfigError):
        bench_run(tmp_path / "empty", [(2.0, 2.0)], keys_cubic())


def test_warp_bench_identity_caps(tiny_dataset, tmp_path):
    mats = tmp_path / "mats"
    mats.mkdir()
    for i in range(2):
        (mats / f"img{i}.txt").write_text("1 0 0 0 1 0 0 0 1")
    report = warp_bench_run(tiny_dataset, mats, keys_cubic())
    for r in report.records:
        assert r.mpsnr == 100.0
        assert r.valid_fraction == 1.0


def test_warp_bench_shift_roundtrip(tiny_dataset, tmp_path):
    mats = tmp_path / "mats"
    mats.mkdir()
    for i in range(2):
        (mats / f"img{i}.txt").write_text("1 0 2.3 0 1 -1.7 0 0 1")
    report = warp_bench_run(tiny_dataset, mats, keys_cubic())
    for r in report.records:
        assert r.mpsnr > 40.0  # smooth image: only interpolation error
        assert 0.5 < r.valid_fraction < 1.0


def test_warp_bench_missing_matrix(tiny_dataset, tmp_path):
    mats = tmp_path / "mats"
    mats.mkdir()
    with pytest.raises(ConfigError):
        warp_bench_run(tiny_dataset, mats, keys_cubic())
