#!/usr/bin/env python3
"""Smoke test for the relaxlim_py extension module.

Build and stage the module first:

    cargo build --release -p relaxlim-py
    cp target/release/librelaxlim_py.so python/relaxlim_py.so

then run `python3 python/smoke_test.py`.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import relaxlim_py as rl


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * (1.0 + abs(b))


def main():
    assert rl.version()

    law = rl.GammaLaw(1.0, 2.0)
    assert close(law.pressure(3.0), 9.0)
    assert close(law.internal_energy(3.0), 9.0)
    # eta(U|U_bar) = 1/2 rho (u - u_bar)^2 + h(rho|rho_bar)
    assert close(law.relative_entropy(1.0, 1.0, 1.0, 0.0), 0.5)
    assert close(law.relative_entropy(2.0, 0.0, 2.0, 0.0), 0.0)
    assert law.relative_entropy(3.0, 1.0, 2.0, 0.0) > 0.0
    assert close(law.energy_rel(3.0, 2.0), law.pressure_rel(3.0, 2.0))

    evs = rl.hessian_eigenvalues(1.0, [0.0, 0.0, 0.0])
    assert all(close(a, b) for a, b in zip(evs, [0.0, 2.0, 2.0, 2.0]))
    evs = rl.hessian_eigenvalues(1.0, [1.0, 0.0, 0.0])
    assert all(close(a, b) for a, b in zip(evs, [0.0, 2.0, 2.0, 4.0]))

    config = """
[system]
kind = "euler"

[grid]
n = 32
x_min = 0.0
x_max = 1.0

[initial]
profile = "sine"
amplitude = 0.5
mean = 2.0

[run]
epsilon = 0.1
t_end = 0.02
"""
    run = rl.run_from_toml(config, 0.1)
    assert len(run.times) == len(run.phi) >= 2
    assert all(math.isfinite(p) and p >= 0.0 for p in run.phi)
    assert run.certified
    assert run.cert_constant >= 0.0

    try:
        rl.run_from_toml("[system]\nkind = \"nope\"\n", 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("bad config should raise ValueError")

    checks = rl.run_checks(seed=42)
    failed = [name for name, ok, _ in checks if not ok]
    assert not failed, f"failed checks: {failed}"

    print(f"smoke test passed ({len(checks)} checks, phi(T) = {run.phi[-1]:.3e})")


if __name__ == "__main__":
    main()
