#!/usr/bin/env python3
"""Smoke test for the pygtensor extension module.

Builds nothing itself: it locates the compiled cdylib under target/
(release preferred), exposes it as an importable module, and exercises the
main types and operations. Build first with

    cargo build --release -p pygtensor

and then run

    python3 python/smoke_test.py
"""

import fractions
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_extension() -> pathlib.Path:
    candidates = [
        ROOT / "target" / "release" / "libpygtensor.so",
        ROOT / "target" / "debug" / "libpygtensor.so",
        ROOT / "target" / "release" / "libpygtensor.dylib",
        ROOT / "target" / "debug" / "libpygtensor.dylib",
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit("build the extension first: cargo build --release -p pygtensor")


def import_module():
    lib = locate_extension()
    staging = pathlib.Path(tempfile.mkdtemp(prefix="pygtensor-smoke-"))
    target = staging / ("pygtensor" + (".so" if lib.suffix == ".so" else ".so"))
    shutil.copy(lib, target)
    sys.path.insert(0, str(staging))
    import pygtensor

    return pygtensor


def main() -> None:
    gt = import_module()
    print(f"pygtensor {gt.__version__} loaded")

    # graphs and their algebra
    k4 = gt.Graph.clique(4)
    assert (k4.num_vertices, k4.num_edges) == (4, 6), k4
    doubled = k4.repeat(2)
    stars = gt.Graph.star(4, 1)
    for u in (2, 3, 4):
        stars = stars.sum(gt.Graph.star(4, u))
    assert stars.is_isomorphic(doubled), "star sum must match the doubled clique"
    half = k4.scale("1/2")
    assert half.common_denominator() == 2
    assert half.scale(2).is_isomorphic(k4)

    # graph tensors: counts, evaluation, flattening rank
    t = gt.Tensor.graph_tensor(gt.Graph.clique(3), 2)
    assert t.nnz == 8 and t.mode_dims == [4, 4, 4], t
    ones = [[1] * d for d in t.mode_dims]
    assert t.evaluate(ones) == "8"
    m2 = gt.Tensor.graph_tensor(gt.Graph.matching(2), 2)
    assert m2.flattening_rank([0, 2]) == 4

    # circuits agree with brute-force tensor evaluation
    c4 = gt.Graph.cycle(4)
    circ = gt.treedec_circuit(c4, 2)
    tens = gt.Tensor.graph_tensor(c4, 2)
    inputs = [[(3 * i + m) % 5 - 2 for i in range(d)] for m, d in enumerate(tens.mode_dims)]
    assert circ.evaluate(inputs) == tens.evaluate(inputs)

    # treewidth
    assert gt.exact_treewidth(gt.Graph.clique(5)) == 4
    assert gt.ltw(gt.Graph.clique(4)) == (4, 4)
    assert gt.ltw_clique_closed_form(5) == 7

    # exponent bounds
    val, exact = gt.star_sum_bound(6, "treewidth")
    assert exact == "11/3", exact
    val, exact, parts = gt.decompose_optimize(gt.Graph.clique(3))
    assert parts == 1 and fractions.Fraction(exact) == fractions.Fraction("2.375478"), exact
    rows = gt.table1()
    assert rows["rank"] == ["1.59", "2.32", "3.09", "3.87", "6.96"], rows
    assert rows["treewidth"] == ["2.00", "2.50", "3.20", "3.67", "5.80"], rows

    # the 4-clique entropy bound
    assert abs(gt.tau_k4_bound(7, 0.0) - 0.772943) < 1e-6
    q, gamma, bound = gt.optimize_tau_k4(7, 7)
    assert bound < 0.772318 and abs(gamma - 0.0012105) < 1e-4, (q, gamma, bound)
    assert abs(gt.mu(0.0) - 1.0) < 1e-12

    # reductions
    assert gt.permanent([[1, 2], [3, 4]]) == 10
    assert gt.permanent_ryser([[1, 2], [3, 4]]) == 10
    assert gt.permanent([[2]]) == 2
    assert gt.cw_degeneration_check(2, 3)
    assert gt.hyperclique_projection_check(2)
    assert len(gt.Graph.hyperclique_incidence(3, 4).matchings()) == 3

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
