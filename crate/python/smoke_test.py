#!/usr/bin/env python3
"""Smoke test for the snseg_py extension module.

Builds nothing itself: expects `cargo build --release -p snseg-py` (or a
debug build) to have produced the cdylib, which is copied into a temp
directory under the importable name and exercised end to end.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_cdylib():
    candidates = [
        REPO / "target" / "release" / "libsnseg_py.so",
        REPO / "target" / "debug" / "libsnseg_py.so",
        REPO / "target" / "release" / "libsnseg_py.dylib",
        REPO / "target" / "debug" / "libsnseg_py.dylib",
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit("build the bindings first: cargo build --release -p snseg-py")


def main():
    lib = locate_cdylib()
    tmp = Path(tempfile.mkdtemp(prefix="snseg_py_"))
    shutil.copy2(lib, tmp / "snseg_py.so")
    sys.path.insert(0, str(tmp))
    import snseg_py as sp

    # Critical-value lookup against the shipped tables.
    kn = sp.critical_value("sncp", 1, 0.05, 0.9)
    assert 130.0 < kn < 155.0, kn
    kn_interp = sp.critical_value("sncp", 1, 102 / 1024, 0.9)
    assert 100.0 < kn_interp < kn, (kn_interp, kn)
    print(f"critical values: eps=0.05 -> {kn:.4f}, eps=102/1024 -> {kn_interp:.4f}")

    # Variance segmentation of the benchmark with variance changes at
    # 400 and 750.
    cols, truth = sp.simulate("v1", seed=7)
    assert truth == [400, 750]
    seg = sp.segment_uni(cols[0], ["variance"], confidence=0.9, epsilon=0.05)
    assert seg.grid_size == 51, seg.grid_size
    assert len(seg.est_cp) == 2, seg.est_cp
    assert all(min(abs(cp - t) for t in truth) <= 40 for cp in seg.est_cp), seg.est_cp
    print(f"variance segmentation: est_cp={seg.est_cp} (truth {truth})")

    d1, d2, dh = sp.hausdorff(truth, seg.est_cp, len(cols[0]))
    assert dh <= 40.0, (d1, d2, dh)
    ari = sp.adjusted_rand_index(truth, seg.est_cp, len(cols[0]))
    assert ari > 0.9, ari
    print(f"metrics: dH={dh:.0f}, ARI={ari:.4f}")

    # Per-segment estimates: middle segment has the inflated variance.
    est = sp.segment_estimates(cols, ["variance"], seg.est_cp)
    label, per_segment = est[0]
    assert label == "variance" and len(per_segment) == 3
    v = [s[0] for s in per_segment]
    assert v[1] > 2.5 * v[0] and v[1] > 2.5 * v[2], v
    print(f"segment variances: {[round(x, 3) for x in v]}")

    # A user-defined functional reproduces the built-in variance path.
    def subsample_variance(window):
        m = len(window)
        mu = sum(window) / m
        return sum((x - mu) ** 2 for x in window) / m

    # Slice straddling the first variance change (global 400 -> local 200).
    short = cols[0][200:650]
    builtin = sp.segment_uni(short, ["variance"], epsilon=0.1)
    generic = sp.segment_uni_fn(
        short, subsample_variance, dim=1, min_support=2, epsilon=0.1
    )
    assert builtin.est_cp == generic.est_cp, (builtin.est_cp, generic.est_cp)
    assert len(generic.est_cp) == 1 and abs(generic.est_cp[0] - 200) <= 45, generic.est_cp
    print(f"generic functional parity: est_cp={generic.est_cp}")

    # High-dimensional mean changes at 100, 200, ..., 500.
    cols_hd, truth_hd = sp.simulate("hd", seed=7)
    seg_hd = sp.segment_hd(cols_hd, confidence=0.9, epsilon=0.05)
    assert len(seg_hd.est_cp) == 5, seg_hd.est_cp
    assert all(
        min(abs(cp - t) for t in truth_hd) <= 25 for cp in seg_hd.est_cp
    ), seg_hd.est_cp
    print(f"high-dimensional segmentation: est_cp={seg_hd.est_cp}")

    # Trimming outside the supported range is clamped with a warning.
    warned = sp.segment_uni(cols[0], ["mean"], epsilon=0.01)
    assert warned.epsilon == 0.05 and len(warned.warnings) == 1, (
        warned.epsilon,
        warned.warnings,
    )
    assert math.isfinite(warned.critical_value)
    print(f"clamp warning surfaced: {warned.warnings[0]}")

    print("smoke test passed")


if __name__ == "__main__":
    main()
