"""Smoke test for the compiled `dunkl` module.

    pip install --no-build-isolation -e crates/py
    python python/smoke.py
"""

import json
import math

import dunkl


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    c = dunkl.constants([0.5, 1.0])
    assert close(c["homogeneous_dim"], 5.0, 1e-15), c
    assert close(c["p_k"], 6.0, 1e-15), c

    # Rank-one check: E_0(lam, x) = e^{lam x}.
    assert close(dunkl.kernel([0.0], [0.7], [1.3]), math.exp(0.91), 1e-12)

    nodes, values = dunkl.transform([0.5], "gauss")
    worst = max(abs(v - math.exp(-0.5 * x[0] ** 2)) for x, v in zip(nodes, values))
    assert worst < 1e-10, worst

    m = dunkl.riesz([0.5], "bump-pair-odd", 0, [7.5], "multiplier")
    k = dunkl.riesz([0.5], "bump-pair-odd", 0, [7.5], "kernel")
    assert abs(m - k) < 1e-4 * abs(m), (m, k)

    # tau_x f(y) = tau_y f(x).
    a = dunkl.translate([0.5], [0.4], [-1.1])
    b = dunkl.translate([0.5], [-1.1], [0.4])
    assert close(a, b, 1e-9), (a, b)

    h = dunkl.hormander([2.5], 0, [1.2], [1.0])
    assert math.isfinite(h) and h > 0.0, h

    report = json.loads(dunkl.cz([0.5]))
    assert report["properties"]["supports_inside_balls"], report

    ok, lines = dunkl.selftest_criteria([0.5], [3, 5])
    for line in lines:
        print(line)
    assert ok

    try:
        dunkl.riesz([0.5], "no-such-function", 0, [7.5])
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("unknown function accepted")

    print("smoke OK")


if __name__ == "__main__":
    main()
