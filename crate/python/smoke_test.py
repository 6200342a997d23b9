"""Smoke test of the bregman_py extension.

Build and install it first:

    pip install --no-build-isolation ./crates/python
"""

import json
import math

import bregman_py as bp


def close(a, b, tol):
    return abs(a - b) <= tol * (1.0 + abs(b))


def main():
    l2 = bp.Space(2, 2.0)
    f = bp.Functional.norm_power(l2, 2.0)
    assert close(f.bregman([0.0, 1.0], [1.0, 0.0]), 1.0, 1e-14)
    assert close(f.sym_bregman([1.0, 0.0], [0.0, 1.0]), 2.0, 1e-14)

    l3 = bp.Space(3, 3.0, weights=[1.0, 2.0, 0.5])
    g = bp.Functional.norm_power(l3, 1.5)
    x = [0.3, -1.2, 2.0]
    j = g.subgradient(x)
    assert close(sum(a * b for a, b in zip(j, x)), l3.norm(x) ** 1.5, 1e-12)
    assert close(l3.dual_norm(j), l3.norm(x) ** 0.5, 1e-12)
    assert abs(g.young_gap(x, j)) < 1e-12
    assert g.young_gap(x, [1.0, 0.0, 0.0]) >= 0.0
    assert g.conjugate().space.r == 1.5

    taus = [k / 10 for k in range(1, 11)]
    rho = bp.space_rho(l2, taus, samples=1024)
    assert close(rho["values"][-1], math.sqrt(2.0) - 1.0, 1e-3)
    fit = bp.power_type_fit(rho["taus"], rho["values"], 0.5, kind="space-rho")
    assert fit["exponent"] == 2.0

    delta = bp.func_delta(bp.Functional.norm_power(bp.Space(2, 4.0), 4.0), [1.0, 0.0], taus, samples=512)
    assert all(v >= 0.0 for v in delta["values"])

    xs = [-2.0 + k * 0.01 for k in range(401)]
    conj = bp.legendre_transform(xs, [t * t / 2 for t in xs], [-1.0, 0.0, 1.0])
    assert all(close(c, s * s / 2, 1e-4) for c, s in zip(conj, [-1.0, 0.0, 1.0]))
    env = bp.biconjugate([0.0, 1.0, 2.0], [0.0, 2.0, 1.0])
    assert close(env[1], 0.5, 1e-12)

    assert "xu-roach-upper" in bp.check_ids()
    rep = json.loads(bp.run_check("xu-roach-upper", r=2.0, p=4.0, tau_bar=0.01))
    assert 1.0 <= rep["fitted_constant"] <= 5.5
    report = json.loads(bp.verify(r=3.0, dim=2, p=2.0, grid=20))
    assert all(c["verdict"] == "pass" for c in report["checks"]), [c["check_id"] for c in report["checks"] if c["verdict"] != "pass"]
    assert bp.verify(r=3.0, dim=2, p=2.0, grid=20) == bp.verify(r=3.0, dim=2, p=2.0, grid=20)

    try:
        bp.Space(2, 1.0).duality_map(2.0, [1.0, 0.0])
    except ValueError as e:
        assert "not smooth" in str(e)
    else:
        raise AssertionError("r = 1 accepted")

    print("smoke test ok:", len(report["checks"]), "checks")


if __name__ == "__main__":
    main()
