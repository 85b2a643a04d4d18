"""Smoke test for the fragtree_py extension. Build it first with `maturin develop` in crates/py."""

import math
import statistics

import fragtree_py as ft


def main():
    beta = ft.Rule("beta:-1.5")
    q = beta.qtable(4)
    assert abs(q["3-1"] - 0.8) < 1e-12 and abs(q["2-2"] - 0.2) < 1e-12, q
    ford = ft.Rule("ford:0.5")
    assert max(abs(a - b) for a, b in zip(ford.qtilde(20), beta.qtilde(20))) < 1e-10
    for spec in ["beta:-1.5", "ford:0.3", "stable:1.5"]:
        r = ft.Rule(spec)
        assert max(r.consistency_residual(n) for n in range(2, 11)) < 1e-9, spec

    trees = beta.simulate(6, reps=5, seed=3)
    assert len(trees) == 5
    assert trees == beta.simulate(6, reps=5, seed=3)
    t = ft.Cladogram.from_newick(trees[0])
    assert t.n_leaves == 6 and len(t.clusters()) == 2 * 6 - 1
    assert ft.Cladogram("((1,2),3)") == ft.Cladogram("(3,(2,1))")

    g = ft.FordGrowth(0.3, seed=1)
    g.grow_to(50)
    assert g.n_leaves == 50 and 0 <= g.spine_left() < 50

    gw = ft.gw_first_split(1.5, 3)
    assert abs(gw["2-1"] - 0.75) < 1e-12 and abs(gw["1-1-1"] - 0.25) < 1e-12

    total, props, newick = ft.line_breaking(0.5, 4, seed=2)
    assert total > 0 and len(props) == 7 and abs(sum(props) - 1) < 1e-12 and newick.endswith(";")

    s = ft.sample_total_length(0.5, 1, 20000, seed=5)
    assert abs(statistics.fmean(s) - math.sqrt(math.pi)) < 0.05
    v = ft.spinal_proportion(0.5, 20000, seed=6)
    assert abs(statistics.fmean(v) - 0.5) < 0.01

    try:
        ft.Rule("nope:1")
    except ValueError:
        pass
    else:
        raise AssertionError("bad model accepted")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
