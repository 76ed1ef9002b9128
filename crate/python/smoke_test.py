"""Smoke test for the nestcode Python bindings.

Uses an installed ``nestcode_py`` if there is one, otherwise loads the
shared library from ``target/release`` (build it with
``cargo build --release -p nestcode-py``).
"""

import importlib.util
import math
import pathlib
import sys


def load():
    try:
        import nestcode_py

        return nestcode_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libnestcode_py.so"
        if lib.exists():
            spec = importlib.util.spec_from_file_location("nestcode_py", lib)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("nestcode_py not found; run cargo build --release -p nestcode-py")


def close(a, b, tol=1e-9):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    nc = load()

    e8 = nc.Lattice.canonical("e8", 8)
    assert e8.nearest_point([0.3] * 8) == [0.5] * 8
    assert e8.contains([0.5] * 8)
    sigma2, std_err = e8.second_moment(50_000, seed=1)
    assert abs(sigma2 - 929 / 12960) < 4 * std_err, sigma2

    d4 = nc.Lattice.canonical("d", 4)
    x = [0.4, -1.3, 2.2, 0.1]
    assert close(d4.nearest_point(x), d4.brute_force_cvp(x, 2.0))
    r = d4.mod_lattice(x)
    assert close(d4.mod_lattice(r), r)

    z = nc.Lattice([[1.0]])
    assert z.nearest_point([0.5]) == [0.0]
    assert z.mod_lattice([0.5]) == [0.5]

    chain = nc.build_chain("z", 1, k=2, f=2, power=1 / 12)
    assert sorted(v[0] for v in chain.codebook(1)) == [-0.25, 0.0, 0.25, 0.5]
    assert sorted(v[0] for v in chain.codebook(2)) == [0.0, 0.5]
    assert chain.code_rate(1) == 2.0
    assert all(passed for _, passed, _ in chain.validate())
    t1 = chain.target_t1([0.25], [0.0], [0.6])
    assert t1 == [-0.25]
    assert chain.recover_v2(t1, [0.25]) == [0.0]
    assert chain.recover_v1_from_t1(t1, [0.0], [0.6]) == [0.25]

    bad = nc.build_chain("z", 2, alpha="2/3")
    assert not all(passed for _, passed, _ in bad.validate())
    try:
        nc.build_chain("hexagonal", 2)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown family accepted")

    a1, a2 = nc.r1_region(5 / 6, 5.0)
    assert abs(a1 - 0.5 * math.log2(6)) < 1e-9 and abs(a2 - 1.0294468) < 1e-6
    assert nc.r2_region(5 / 6, 5.0) == (a2, a1)
    assert abs(nc.outer_bound(5.0) - 0.5 * math.log2(6)) < 1e-12
    assert abs(nc.cf_rate(5.0) - 0.5 * math.log2(5.5)) < 1e-12
    region = nc.rate_region(5.0, grid=64)
    assert close(region["point_a"], (a1, a2))
    assert {row[0] for row in region["rows"]} >= {"T1-region", "T2-region", "hull"}
    assert nc.convex_hull([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.2, 0.2)])

    e8_chain = nc.build_chain("e8", 8, k=1, f=2)
    trial = e8_chain.trial(0.0, seed=4, index=7)
    assert trial["correct"] and close(trial["estimate"], trial["target"])

    report = nc.run_monte_carlo(e8_chain, 1e9, 2000, 4)
    assert report["error_count"] == 0 and report["trials"] == 2000
    again = nc.run_monte_carlo(e8_chain, 1e9, 2000, 4)
    assert report == again

    noisy = nc.build_chain("d", 4, k=2, f=1)
    relay = nc.run_gtwrc(noisy, 8.0, 3000, 9, target="T2")
    assert relay["uplink_errors"] == relay["e2e_errors"]
    assert relay["mismatched_trials"] == 0
    mac = nc.run_monte_carlo(noisy, 8.0, 3000, 9, target="T2")
    assert mac["error_count"] == relay["uplink_errors"]

    print("python smoke test passed")


if __name__ == "__main__":
    main()
