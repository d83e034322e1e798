#!/usr/bin/env python3
"""Smoke test for the interval_stats extension module.

Builds are produced by cargo as lib<name>.so; this script copies the newest
build into a temp directory under the importable module name, imports it,
and exercises the main entry points end to end.

Usage:
    cargo build -p interval-stats-py            # or --release
    python3 python/smoke_test.py
"""

import json
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_library() -> pathlib.Path:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libinterval_stats.so", "interval_stats.dll", "libinterval_stats.dylib")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "extension not built; run `cargo build -p interval-stats-py` first"
        )
    return max(built, key=lambda p: p.stat().st_mtime)


def import_module():
    lib = locate_library()
    staging = pathlib.Path(tempfile.mkdtemp(prefix="interval-stats-py-"))
    suffix = ".so" if lib.suffix in (".so", ".dylib") else ".pyd"
    shutil.copy2(lib, staging / f"interval_stats{suffix}")
    sys.path.insert(0, str(staging))
    import interval_stats  # noqa: E402

    return interval_stats


def approx(a, b, tol):
    assert abs(a - b) < tol, f"{a} !~ {b} (tol {tol})"


def main():
    ist = import_module()

    # Dataset ingestion and descriptive statistics.
    cars = ist.Dataset.bundled("cars.csv")
    assert (cars.n, cars.p) == (8, 4), (cars.n, cars.p)
    desc = cars.describe()
    approx(desc["variables"][0]["mean"], 201.4687, 1e-3)

    medical = ist.Dataset.bundled("medical.csv")
    assert (medical.n, medical.p) == (59, 3)

    # Round trip through CSV text.
    again = ist.Dataset.from_csv(cars.to_csv())
    assert again.internal_means() == cars.internal_means()

    # Point estimates match the published tables.
    est = ist.estimate(medical, wishart_df=57.0, method="both", ci=0.95)
    ml, bayes = est["estimates"]
    approx(ml["mu"][0], 74.5169, 1e-3)
    approx(ml["sigma"][0][0], 116.08446, 1e-2)
    approx(bayes["sigma"][0][0], 122.30327, 1e-2)
    assert len(ml["confidence_intervals"]) == 3 + 6
    ratio = bayes["sigma"][1][2] / ml["sigma"][1][2]
    approx(ratio, 59.0 / 56.0, 1e-12)

    est_cars = ist.estimate(cars, wishart_df=5.0)
    ml_c, bayes_c = est_cars["estimates"]
    approx(bayes_c["sigma"][3][3] / ml_c["sigma"][3][3], 2.0, 1e-12)
    approx(ml_c["lambda"][0][0], 235.613, 1e-2)

    # Normality diagnostics on the medical means.
    mar = ist.mardia(medical)
    assert 0.02 < mar["skewness"]["p_value"] < 0.6, mar["skewness"]
    assert mar["kurtosis"]["p_value"] > 0.05

    # Wishart fit on the cars spreads (bootstrap variant).
    gof = ist.wishart_gof(cars, wishart_df=5.0, bootstrap=100, seed=1)
    assert gof["method"] == "wishart-gof-boot"
    assert 0.0 <= gof["p_value"] <= 1.0

    # Simulation harness: determinism plus sane scenario-I estimates.
    rep1 = ist.simulate("I", n=200, reps=200, seed=9)
    rep2 = ist.simulate("I", n=200, reps=200, seed=9)
    assert rep1 == rep2
    rows = {(r["parameter"], r["estimator"]): r["mean"] for r in rep1["rows"]}
    approx(rows[("mu", "ML")], 2.0, 0.1)
    approx(rows[("sigma2", "Bayes")], 5.0, 0.5)
    text = ist.simulate_text("I", n=50, reps=20, seed=1)
    assert text.splitlines()[0].startswith("Scenario I")

    # Risk comparison favors the Bayes covariance estimator.
    cmp = ist.risk("II", n=25, reps=400, seed=2)
    assert cmp["sigma_gap"]["mean"] > 0.0
    approx(cmp["closed_form_delta_sigma"], math.log(25.0 / 24.0), 1e-12)

    # Scalar utilities.
    approx(ist.stein_loss([[1.0]], [[2.0]]), 2.0 - math.log(2.0) - 1.0, 1e-12)
    approx(ist.boxcox_transform(math.e, 0.0), 1.0, 1e-12)
    approx(ist.power_transform_value(3.0, 2.0), 9.0, 1e-12)
    kappa = ist.optimal_boxcox_kappa([math.exp(0.1 * k) for k in range(1, 60)])
    assert -3.0 < kappa < 3.0

    # Input validation surfaces as Python exceptions.
    try:
        ist.Dataset.from_csv("a_1,b_1\n9,3\n")
    except ValueError as e:
        assert "lower > upper" in str(e)
    else:
        sys.exit("expected ValueError for an inverted interval")

    print("smoke test OK:", json.dumps({
        "cars_mu1": ml_c["mu"][0],
        "medical_sigma11_bayes": bayes["sigma"][0][0],
        "mardia_skew_p": mar["skewness"]["p_value"],
        "sigma_gap": cmp["sigma_gap"]["mean"],
    }, indent=2))


if __name__ == "__main__":
    main()
