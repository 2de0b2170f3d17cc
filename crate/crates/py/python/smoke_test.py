"""Smoke test for the hermcurv extension module.

Build and run from the repository root:

    cargo build --release -p hermcurv-py --features extension-module
    cp target/release/libhermcurv.so crates/py/python/hermcurv.so
    python3 crates/py/python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hermcurv  # noqa: E402


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    names = hermcurv.catalog_names()
    assert "hopf-2" in names and "adm-product-surface" in names, names

    hopf = hermcurv.Metric.builtin("hopf-2")
    assert hopf.dim == 2
    p = hopf.sample_points(3, seed=1)[0]
    rep = hopf.report(p)
    assert close(rep["u"], 2.0) and close(rep["v"], 1.0), rep
    assert close(rep["eta_norm2"], 1.0), rep

    x = [0.3 - 0.2j, 1.1 + 0.4j]
    assert abs(hopf.mixed_curvature(p, x, 1.0, -2.0)) < 1e-10
    assert close(hopf.sphere_average(p, 0.0, 1.0), 0.5)
    mean, se = hopf.sphere_average_mc(p, 0.0, 1.0, samples=20000, seed=3)
    assert abs(mean - 0.5) <= 3 * se + 1e-10, (mean, se)

    ext = hopf.extremize([1.0, 0.0], 0.0, 1.0)
    assert ext["spread"] > 1e-2 and ext["converged"], ext
    ext = hopf.extremize(p, 1.0, -2.0)
    assert ext["spread"] < 1e-8, ext

    flat = hermcurv.Metric.parse("dim 2; domain annulus 0.5 2; g[1,1] = 1; g[2,2] = 1")
    image = flat.conformal("-0.5*log(abs2(z))")
    assert close(image.report(p)["u"], 2.0)
    r = image.curvature(p, frame="unitary")
    assert len(r) == 2 and len(r[0][0][0]) == 2

    fs = hermcurv.Metric.builtin("fubini-study-2")
    q = fs.sample_points(1, seed=0)[0]
    assert fs.report(q)["kahler_defect"] < 1e-10
    assert close(fs.extremize(q, 0.0, 1.0)["max"], 2.0, 1e-8)

    try:
        hermcurv.Metric.parse("dim 2; g[1,1] =")
    except ValueError as e:
        assert "line 1" in str(e), e
    else:
        raise AssertionError("parse error not raised")

    checks = hermcurv.verify("surface")
    assert checks and all(c["pass"] for c in checks), [c for c in checks if not c["pass"]]

    assert not math.isnan(rep["u"])
    print(f"smoke test ok: {len(names)} catalog metrics, {len(checks)} surface checks")


if __name__ == "__main__":
    main()
