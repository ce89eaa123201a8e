"""Smoke test for the prodsys Python extension."""

from pathlib import Path

import prodsys

FIXTURES = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"


def main():
    o23 = prodsys.ProductSystem.one_vertex([2, 3], cap=6)
    assert o23.k == 2 and o23.fiber_dim([1, 2]) == 18
    assert o23.check_axioms()["checks"]
    assert o23.fowler_injectivity(6) == (True, None)
    assert prodsys.ProductSystem.one_vertex([2, 2]).fowler_injectivity(4) == (False, ([1, 0], [0, 1]))

    o2 = prodsys.ProductSystem.load(str(FIXTURES / "o2.json"), cap=3)
    swap = prodsys.Action.load(str(FIXTURES / "o2_swap.json"), o2)
    cs = prodsys.CrossedSystem(o2, swap)
    assert all(c["passed"] for c in cs.report()["checks"])
    assert cs.fiber_dim([2]) == 8
    assert cs.faithfulness([2]) == (True, 0)
    assert all(c["passed"] for c in cs.inner_identity([1], [2], samples=20)["checks"])
    assert all(c["passed"] for c in cs.lambda_isomorphism([1])["checks"])
    core = cs.core_bratteli([[1], [2]])
    assert sorted(core["levels"][0]["sizes"]) == cs.reference_core_blocks([1])

    graph = prodsys.ProductSystem.load(str(FIXTURES / "two_vertex_graph.json"), cap=3)
    edges = graph.core_bratteli([[1], [2], [3]])["edges"]
    assert edges == [[[1, 1], [1, 0]]] * 2

    s3 = prodsys.DoplicherRoberts.load(str(FIXTURES / "dr_s3.json"))
    assert s3.hom_dim([0, 0, 2], [0, 0, 2]) == 3
    assert s3.hom_basis_len([0, 0, 1], [0, 0, 2]) == 1
    a, b = s3.invariant_core_dim([0, 1, 1])
    assert a == b

    assert prodsys.run_cli(["validate", str(FIXTURES / "malformed.json")]) == 2
    print("python smoke test passed")


if __name__ == "__main__":
    main()
