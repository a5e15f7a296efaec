#!/usr/bin/env python3
"""Smoke test for the qbaker_py extension module.

Install the bindings first:

    pip install -e crates/qbaker-py --no-build-isolation

then run `python3 python/smoke_test.py`.
"""

import math

import qbaker_py as qb


def check(name, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"  {name}: {status} {detail}")
    if not ok:
        raise SystemExit(f"smoke test failed at {name}")


def main():
    print("qbaker_py smoke test")

    spec = qb.QuantizationSpec.standard("saraceno", 2, 64)
    check("spec roundtrip", spec.a == 2 and spec.n == 64 and spec.theta == (0.5, 0.5))
    check("cache key", spec.cache_key().startswith("saraceno|A=2|N=64|"))

    check("builder unitary", qb.unitarity_defect(spec) < 1e-10 * 64)

    angles = qb.spectrum(spec)
    check(
        "spectrum shape",
        len(angles) == 64 and all(0.0 <= a < 2 * math.pi for a in angles),
    )
    check("spectrum sorted", angles == sorted(angles))

    r = qb.gap_ratio(angles)
    check("gap ratio sane", 0.3 < r < 0.7, f"(r = {r:.4f})")

    refs = qb.reference_gap_ratios()
    check("reference table", abs(refs["goe"] - 0.53590) < 1e-12)

    raw, averaged = qb.form_factor(angles, 20)
    check("sff lengths", len(raw) == 20 and len(averaged) == 20)
    check("sff positive", all(v >= 0.0 for v in raw))

    z2, z2_coe = qb.persistence(angles, 10)
    check("persistence starts at 1", abs(z2[0] - 1.0) < 1e-12)
    check("coe reference decays", z2_coe[0] > z2_coe[-1])

    check("phaseless class", qb.slope_class("bv", 2, [0.0, 0.0]) == "four")
    check("shifted class", qb.slope_class("bv", 2, [0.0, 0.37]) == "two")

    pred = qb.diag_sff_prediction("bv", 2, 5, 100, [0.0, 0.0])
    check("diag prediction 4t/N", abs(pred - 0.2) < 1e-12, f"(pred = {pred})")

    re, im = qb.trace_po("bv", 2, 1, 8, [0.0, 0.0])
    check(
        "orbit sum hand value",
        abs(re - math.sqrt(2)) < 1e-12 and abs(im) < 1e-12,
        f"(tr = {re:.6f}{im:+.6f}j)",
    )

    cue = qb.sample_ensemble("cue", 100, seed=7)
    check("ensemble draw", len(cue) == 100)
    again = qb.sample_ensemble("cue", 100, seed=7)
    check("ensemble seeded", cue == again)

    res, values = qb.husimi(spec, 0, resolution=12)
    check("husimi grid", res == 12 and len(values) == 144)
    check("husimi nonnegative", all(v >= 0.0 for v in values))

    rand = spec.with_random_alpha(3)
    check("random alpha", len(rand.alpha) == 2 and rand.alpha != spec.alpha)

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
