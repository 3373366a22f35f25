"""Benchmark harness: task grids over a dataset directory, CSV + table output.

Upsampling tasks degrade each HR image with the bicubic assumption, resample
back with the configured method and score against the original. Warp tasks
round-trip each image through a homography and its inverse and score the
reconstruction on the composite valid mask.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import Homography, Scale, load_homography
from .image import ImageBuffer, load_image
from .kernels import KernelFamily
from .lut import LutBank
from .metrics import degrade_bicubic, mpsnr, psnr_y, ssim
from .resample import (
    PreprocessConfig,
    ResampleJob,
    enhancer_preproc,
    identity_preproc,
    resample,
)


@dataclass(frozen=True)
class MetricRecord:
    image: str
    task: str
    psnr_y: float
    mpsnr: float
    ssim: float
    valid_fraction: float


@dataclass
class BenchReport:
    records: list = field(default_factory=list)
    task_means: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def finalize(self):
        self.records.sort(key=lambda r: (r.image, r.task))
        tasks = sorted({r.task for r in self.records})
        self.task_means = {}
        for t in tasks:
            rows = [r for r in self.records if r.task == t]
            self.task_means[t] = {
                "psnr_y": float(np.mean([r.psnr_y for r in rows])),
                "mpsnr": float(np.mean([r.mpsnr for r in rows])),
                "ssim": float(np.mean([r.ssim for r in rows])),
                "valid_fraction": float(np.mean([r.valid_fraction for r in rows])),
                "n": len(rows),
            }
        return self


def bank_digest(bank: LutBank) -> str:
    h = hashlib.sha256()
    for t in list(bank.f_tables) + list(bank.g_tables):
        h.update(t.pattern.encode())
        h.update(t.role.encode())
        h.update(t.entries.tobytes())
    return h.hexdigest()[:16]


def _dataset_images(dataset_dir) -> list:
    paths = sorted(Path(dataset_dir).glob("*.png"))
    if not paths:
        raise ConfigError(f"no PNG images under {dataset_dir}")
    return paths


def parse_tasks(spec: str) -> list:
    """Parse a task list like "2.0x2.0,1.5x2.0" into (r_h, r_w) pairs."""
    tasks = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.lower().split("x")
        if len(parts) != 2:
            raise ConfigError(f"bad task {tok!r}, expected RHxRW")
        tasks.append((float(parts[0]), float(parts[1])))
    if not tasks:
        raise ConfigError(f"no tasks in {spec!r}")
    return tasks


def _modcrop(img: ImageBuffer, r_h: float, r_w: float) -> ImageBuffer:
    """Crop so integer upsampling factors divide the dims (exact round trip)."""
    h, w = img.height, img.width
    if abs(r_h - round(r_h)) < 1e-9:
        h -= h % int(round(r_h))
    if abs(r_w - round(r_w)) < 1e-9:
        w -= w % int(round(r_w))
    return ImageBuffer(img.data[:h, :w], img.depth_tag, img.colorspace)


def default_preproc(kernel: KernelFamily, bank: LutBank) -> PreprocessConfig:
    """LUT-enhancer preprocessing when the bank carries g-tables."""
    if kernel.is_adaptive and bank is not None and bank.has_enhancer:
        return enhancer_preproc()
    return identity_preproc()


def run_task(hr: ImageBuffer, r_h: float, r_w: float, kernel: KernelFamily,
             bank: LutBank = None, hyper_map=None, preproc: PreprocessConfig = None,
             shave: int = None):
    """Degrade -> resample -> score one image for one upsampling task.

    Returns (record metrics dict, sr image). r_h/r_w >= 1 are upsampling
    factors; the degradation uses their inverses.
    """
    if not (r_h >= 1 and r_w >= 1):
        raise ConfigError(f"bench tasks are upsampling tasks, got {r_h}, {r_w}")
    hr = _modcrop(hr, r_h, r_w)
    lr = degrade_bicubic(hr, 1.0 / r_h, 1.0 / r_w)
    tgt_h = int(math.floor(lr.height * r_h))
    tgt_w = int(math.floor(lr.width * r_w))
    hr_cmp = ImageBuffer(hr.data[:tgt_h, :tgt_w], hr.depth_tag, hr.colorspace)
    if preproc is None:
        preproc = default_preproc(kernel, bank)
    job = ResampleJob(lr, Scale(r_h, r_w), kernel, (tgt_h, tgt_w),
                      preproc=preproc, bank=bank, hyper_map=hyper_map)
    res = resample(job)
    sr = ImageBuffer(np.clip(res.image.data, 0.0, 1.0), colorspace=res.image.colorspace)
    if shave is None:
        shave = int(math.ceil(max(r_h, r_w)))
    metrics = {
        "psnr_y": psnr_y(sr, hr_cmp, shave=shave),
        "mpsnr": mpsnr(sr, hr_cmp, res.valid),
        "ssim": _shaved_ssim(sr, hr_cmp, shave),
        "valid_fraction": float(np.mean(res.valid)),
    }
    return metrics, sr


def _shaved_ssim(a: ImageBuffer, b: ImageBuffer, shave: int) -> float:
    if shave > 0:
        a = ImageBuffer(a.data[shave:-shave, shave:-shave], colorspace=a.colorspace)
        b = ImageBuffer(b.data[shave:-shave, shave:-shave], colorspace=b.colorspace)
    return ssim(a, b)


def bench_run(dataset_dir, tasks, kernel: KernelFamily, bank: LutBank = None,
              shave: int = None, preproc: PreprocessConfig = None) -> BenchReport:
    """Evaluate every task on every image of a dataset directory."""
    paths = _dataset_images(dataset_dir)
    report = BenchReport(config={
        "dataset": str(dataset_dir),
        "kernel": kernel.kind,
        "bank": bank_digest(bank) if bank is not None else None,
        "boundary": "replicate",
        "luma": "bt601-limited",
        "shave": "ceil(max scale)" if shave is None else shave,
    })
    for rh, rw in tasks:
        task_name = f"{rh:g}x{rw:g}"
        for path in paths:
            hr = load_image(path)
            m, _ = run_task(hr, rh, rw, kernel, bank=bank, shave=shave, preproc=preproc)
            report.records.append(MetricRecord(path.stem, task_name, **m))
    return report.finalize()


def warp_bench_run(dataset_dir, matrices_dir, kernel: KernelFamily,
                   bank: LutBank = None) -> BenchReport:
    """Round-trip warp benchmark: warp by M, warp back by M^-1, score vs input.

    Each image `name.png` pairs with `name.txt` (9 reals, row-major,
    target-to-source). The score is restricted to pixels valid in both legs.
    """
    paths = _dataset_images(dataset_dir)
    report = BenchReport(config={
        "dataset": str(dataset_dir),
        "matrices": str(matrices_dir),
        "kernel": kernel.kind,
        "bank": bank_digest(bank) if bank is not None else None,
    })
    for path in paths:
        mat_path = Path(matrices_dir) / (path.stem + ".txt")
        if not mat_path.is_file():
            raise ConfigError(f"no matrix file for {path.stem}: {mat_path}")
        m = load_homography(mat_path)
        src = load_image(path)
        preproc = default_preproc(kernel, bank)
        hw = (src.height, src.width)
        fwd = resample(ResampleJob(src, Homography(m), kernel, hw,
                                   preproc=preproc, bank=bank))
        warped = ImageBuffer(np.clip(fwd.image.data, 0, 1), colorspace=src.colorspace)
        back = resample(ResampleJob(warped, Homography(np.linalg.inv(m)), kernel, hw,
                                    preproc=preproc, bank=bank))
        recon = ImageBuffer(np.clip(back.image.data, 0, 1), colorspace=src.colorspace)
        # composite mask: valid in the backward leg and mapped onto forward-valid pixels
        mask = back.valid & fwd.valid
        report.records.append(MetricRecord(
            path.stem, "roundtrip",
            psnr_y=psnr_y(recon, src, shave=0),
            mpsnr=mpsnr(recon, src, mask),
            ssim=ssim(recon, src),
            valid_fraction=float(np.mean(mask)),
        ))
    return report.finalize()


def write_csv(report: BenchReport, path) -> None:
    with open(Path(path), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["image", "task", "psnr_y", "mpsnr", "ssim", "valid_fraction"])
        for r in report.records:
            w.writerow([r.image, r.task, f"{r.psnr_y:.6f}", f"{r.mpsnr:.6f}",
                        f"{r.ssim:.6f}", f"{r.valid_fraction:.6f}"])


def format_table(report: BenchReport) -> str:
    lines = [f"{'task':>10} {'n':>3} {'psnr_y':>8} {'mpsnr':>8} {'ssim':>7} {'valid':>6}"]
    for task, m in report.task_means.items():
        lines.append(
            f"{task:>10} {m['n']:>3} {m['psnr_y']:>8.3f} {m['mpsnr']:>8.3f} "
            f"{m['ssim']:>7.4f} {m['valid_fraction']:>6.3f}"
        )
    return "\n".join(lines)
