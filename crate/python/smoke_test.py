"""Smoke test for the kll extension module.

Build and install the wheel first:

    cd crates/py && maturin build --release
    pip install --force-reinstall ../../target/wheels/kll-*.whl
    python python/smoke_test.py
"""

import math
import os
import tempfile

import kll


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL {what}")
    print(f"ok   {what}")


def main():
    band = kll.Band(2, 2)
    check(band.x_count() == 27, "strict Euclidean x band has 27 modes at N_x = 2")
    check(kll.Band.knudsen_scaling(0.25, 1.0) == kll.Band(4, 4), "Knudsen scaling at eps = 1/4")

    basis = kll.Basis(2)
    check(abs(basis.c1 - math.pi * math.sqrt(2)) < 1e-12, "c1 = pi sqrt 2 at N_v = 2")
    check(basis.gram_residual() < 1e-12, "Gram matrix is the identity")

    f = kll.SpectralField.random(band, 0.3, decay=0.6, seed=5)
    g = kll.SpectralField.random(band, 0.3, decay=0.6, seed=5)
    check(f.max_abs_diff(g) == 0.0, "seeded random fields are reproducible")
    check(f.reality_defect() < 1e-14, "random field is real")
    m = basis.moments(f)
    check(set(m) == {"rho", "u1", "u2", "u3", "theta"}, "moments dict has five fields")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "f.kll")
        f.save(path)
        check(kll.SpectralField.load(path).max_abs_diff(f) == 0.0, "checkpoint roundtrip")

    params = kll.KineticParams(0.2, 1.0)
    h0 = kll.SpectralField.constant(band, 1.0)
    h1, hist = kll.integrate(h0, params, basis, 1e-3, 1.0, integrator="rk4")
    exact = kll.homogeneous_solution(1.0, 1.0, params)
    err = abs(h1.get([0, 0, 0], [0, 0, 0]).real - exact) / exact
    check(err < 1e-6, f"homogeneous run matches the ODE (rel err {err:.1e})")
    check(min(hist["margin"]) >= 0.0, "energy margin stays nonnegative")

    stepped = kll.step(f, 1e-3, params, basis)
    check(stepped.norms()[1] <= f.norms()[1], "one IMEX step does not raise the energy")

    k = kll.closure_constants(16)
    gaps = {g["name"]: g["gap"] for g in k["gaps"]}
    check(gaps["det_D"] < 1e-3, "det D is close to 1/60 at N_v = 16")

    rows = kll.verify_closure()
    failed = sorted(r["symbol"] for r in rows if not r["pass"])
    check(failed == ["G: θ |u|^2", "c1^2 x coefficient of ∂_i|u|^2"], "exactly the two known table slips fail")

    config = """
[params]
epsilon = 0.5
nu_star = 1.0

[integrator]
kind = "imex"
dt = 0.01
t_end = 0.05
"""
    out = kll.simulate(config, ["initial.amplitude=0.2"])
    check(out["report"]["outcome"]["pass"], "simulate passes its invariants")
    check(len(out["series"]) == 6, "series has one row per step")
    check(kll.run_cli(["constants", "--n-v", "2"]) == 0, "CLI constants exits 0")

    try:
        kll.simulate(config, ["integrator.dt=-1"])
    except ValueError:
        check(True, "bad config raises ValueError")
    else:
        raise SystemExit("FAIL bad config was accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
