#!/usr/bin/env python3
"""Calibration pilot for the shipped ``dotcom`` preset.

Runs the generator + pipeline across seeds 1..20 and reports, per seed:
  (a) Spearman rank correlation of window index vs household l_max over the
      pre-tipping windows (windows ending at or before the tipping day);
  (b) the drop from the pre-onset household l_min mean (windows ending
      before the contrarian onset) to the minimum l_min over the first
      three windows starting at or after the onset;
  (c) |Spearman| of window index vs financial-institution l_max over the
      same pre-tipping windows (no-trend control group).

The summary counts back the pass thresholds wired into the acceptance
suite.  Usage: python3 scripts/dotcom_pilot.py [--seeds 20] [--preset dotcom]
"""

from __future__ import annotations

import argparse
import sys
import time

from scipy.stats import spearmanr

from investornet.ingest import DEFAULT_CATEGORY_MAPPING
from investornet.metrics import run_pipeline
from investornet.synth import SynthConfig, generate_market, load_preset
from investornet.windows import WindowSpec


def window_sets(rows_hh, tipping_day: int, onset_day: int):
    pre_tipping = [r for r in rows_hh if r.window_end_day <= tipping_day]
    pre_onset = [r for r in rows_hh if r.window_end_day < onset_day]
    post_onset = [r for r in rows_hh if r.window_start_day >= onset_day][:3]
    return pre_tipping, pre_onset, post_onset


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--preset", default="dotcom")
    args = ap.parse_args()

    base = load_preset(args.preset)
    spec = WindowSpec()
    tipping = int(base["tipping_day"])
    onset = int(base["contrarian_onset_day"])

    results = []
    for seed in range(1, args.seeds + 1):
        t0 = time.time()
        config = SynthConfig.from_dict({**base, "seed": seed})
        market = generate_market(config)
        result = run_pipeline(market.records, spec, DEFAULT_CATEGORY_MAPPING, jobs=1)

        by_cat = {}
        for row in result.rows:
            by_cat.setdefault(row.category, []).append(row)
        windows = {w.index: w for w in result.windows}

        def series(cat):
            rows = by_cat[cat]
            idx = [r.window_index for r in rows]
            lmax = [r.l_max for r in rows]
            lmin = [r.l_min for r in rows]
            end_day = [windows[r.window_index].end_day for r in rows]
            start_day = [windows[r.window_index].start_day for r in rows]
            return idx, lmax, lmin, end_day, start_day

        hh_idx, hh_lmax, hh_lmin, hh_end, hh_start = series("HH")
        fi_idx, fi_lmax, _, fi_end, _ = series("FI")

        pre_tip = [k for k, e in zip(hh_idx, hh_end) if e <= tipping]
        pre_onset = [k for k, e in zip(hh_idx, hh_end) if e < onset]
        post_onset = [k for k, s in zip(hh_idx, hh_start) if s >= onset][:3]

        rho_hh = spearmanr(pre_tip, [hh_lmax[k] for k in pre_tip]).statistic
        pre_mean = sum(hh_lmin[k] for k in pre_onset) / len(pre_onset)
        post_min = min(hh_lmin[k] for k in post_onset)
        drop = pre_mean - post_min
        rho_fi = spearmanr(pre_tip, [fi_lmax[k] for k in pre_tip]).statistic

        results.append((seed, rho_hh, drop, rho_fi, time.time() - t0))
        print(
            f"seed {seed:2d}: spearman_hh={rho_hh:+.3f} lmin_drop={drop:+.3f} "
            f"lmax01={hh_lmax[0]:+.3f}..{hh_lmax[20]:+.3f} "
            f"spearman_fi={rho_fi:+.3f} ({results[-1][4]:.1f}s)",
            flush=True,
        )

    n = len(results)
    pass_a = sum(1 for _, a, _, _, _ in results if a >= 0.8)
    pass_b = sum(1 for _, _, b, _, _ in results if b >= 0.1)
    pass_c = sum(1 for _, _, _, c, _ in results if abs(c) <= 0.4)
    print(f"\npre-tipping windows: {len(pre_tip)}, pre-onset: {len(pre_onset)}, "
          f"post-onset: {post_onset}")
    print(f"(a) spearman_hh >= 0.8   : {pass_a}/{n}")
    print(f"(b) lmin drop  >= 0.1    : {pass_b}/{n}")
    print(f"(c) |spearman_fi| <= 0.4 : {pass_c}/{n}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
