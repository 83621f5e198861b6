"""Graph validation, normal forms, enumeration, minimal common extensions
and the completion property.

The brute-force oracles here are independent of the operations they check:
morphism counts come from vertex-matrix products over the integers, and
minimal common extensions are recomputed by scanning all morphisms of the
join degree and reading off their two initial segments.
"""

import random

import pytest

from kgraph_kms.degrees import Degree
from kgraph_kms.kgraph import (
    AxiomError,
    Edge,
    KGraph,
    MorphismBudgetError,
)
from kgraph_kms.sample_graphs import (
    commuting_2x2,
    one_vertex_loops,
    random_product_2graph,
    random_single_vertex_2graph,
    single_vertex_2graph,
    twisted_2x2,
)

def D(*entries):
    if len(entries) == 1 and isinstance(entries[0], tuple):
        return Degree(entries[0])
    return Degree(entries)


# ---------------------------------------------------------------------------
# validation


def test_validate_one_vertex_two_loops():
    g = one_vertex_loops(2)
    assert g.validate().valid  # k = 1: no squares to check


def test_validate_twisted_example(twisted):
    assert twisted.validate().valid


def test_validate_missing_square_entry():
    squares = dict(twisted_2x2().squares)
    del squares[("e", "g")]
    g = single_vertex_2graph(["e", "f"], ["g", "h"], squares)
    rep = g.validate()
    assert not rep.valid
    missing = [i for i in rep.issues if "missing" in i.message]
    assert missing and missing[0].witness == ("e", "g")


def test_validate_non_injective_square():
    squares = dict(twisted_2x2().squares)
    squares[("e", "g")] = squares[("f", "h")]  # two pairs with one image
    g = single_vertex_2graph(["e", "f"], ["g", "h"], squares)
    rep = g.validate()
    assert not rep.valid
    assert any("injective" in i.message or "surjective" in i.message for i in rep.issues)


def test_validate_dangling_ids_reported_as_malformed():
    g = KGraph(1, ["v"], [Edge("a", 1, "v", "nowhere")], {})
    rep = g.validate()
    assert not rep.valid and rep.malformed


def test_validate_source_and_sink():
    # the isolated vertex v is both a source and a sink
    g = KGraph(1, ["u", "v"], [Edge("a", 1, "u", "u")], {})
    rep = g.validate()
    messages = " | ".join(i.message for i in rep.issues)
    assert "source" in messages and "sink" in messages


HEX_EDGES = (
    [Edge(e, 1, "v", "v") for e in ("a1", "a2")]
    + [Edge(e, 2, "v", "v") for e in ("b1", "b2")]
    + [Edge(e, 3, "v", "v") for e in ("c1", "c2")]
)

# pairwise-bijective square data that fails only associativity
HEX_BAD_SQUARES = {
    ("a1", "b1"): ("b2", "a1"),
    ("a1", "b2"): ("b1", "a1"),
    ("a2", "b1"): ("b1", "a2"),
    ("a2", "b2"): ("b2", "a2"),
    ("a1", "c1"): ("c1", "a1"),
    ("a1", "c2"): ("c1", "a2"),
    ("a2", "c1"): ("c2", "a2"),
    ("a2", "c2"): ("c2", "a1"),
    ("b1", "c1"): ("c1", "b1"),
    ("b1", "c2"): ("c2", "b1"),
    ("b2", "c1"): ("c1", "b2"),
    ("b2", "c2"): ("c2", "b2"),
}


def test_hexagon_failure_detected_for_k3():
    g = KGraph(3, ["v"], HEX_EDGES, HEX_BAD_SQUARES)
    rep = g.validate()
    assert not rep.valid
    assert all("associativity" in i.message for i in rep.issues)


def test_hexagon_passes_for_commuting_k3():
    squares = {}
    loops = {1: ("a1", "a2"), 2: ("b1", "b2"), 3: ("c1", "c2")}
    for i in range(1, 4):
        for j in range(i + 1, 4):
            for e in loops[i]:
                for f in loops[j]:
                    squares[(e, f)] = (f, e)
    g = KGraph(3, ["v"], HEX_EDGES, squares)
    assert g.validate().valid
    # unique factorization survives in rank 3
    p = g._word_path(("a1", "b2", "c1"))
    q, rest = g.factor(p, D((0, 1, 0)))
    assert g.compose(q, rest) == p


# ---------------------------------------------------------------------------
# enumeration


def test_enumerate_degree_counts(twisted, two_loops):
    assert len(twisted.morphisms(D((1, 1)))) == 4  # 2 reds x 2 blues
    assert len(two_loops.morphisms(D((3,)))) == 8  # 2^3 words
    verts = twisted.morphisms(D((0, 0)))
    assert [p.source for p in verts] == list(twisted.vertices)


def test_enumeration_matches_matrix_oracle(product_graph, twisted):
    for g in (product_graph, twisted):
        for n in D((2, 2)).box():
            if n.total() > 6:
                continue
            assert len(g.morphisms(n)) == g.morphism_count(n)


def test_enumeration_sorted_and_budget(two_loops):
    paths = two_loops.morphisms(D((3,)))
    assert list(paths) == sorted(paths)
    small = one_vertex_loops(2)
    small.morphism_budget = 7
    with pytest.raises(MorphismBudgetError):
        small.morphisms(D((3,)))


# ---------------------------------------------------------------------------
# composition and factorization


def test_compose_identity(twisted):
    q = twisted.morphisms(D((1, 1)))[0]
    v = twisted.vertex_path(q.range)
    assert twisted.compose(v, q) == q
    assert twisted.compose(q, twisted.vertex_path(q.source)) == q


def test_compose_color_ordered_direct(twisted):
    e, g_edge = twisted.edge_path("e"), twisted.edge_path("g")
    assert twisted.compose(e, g_edge).edges == ("e", "g")


def test_compose_rewrites_ge_to_fh(twisted):
    # the square fh = ge forces the color-ordered form (f, h)
    g_edge, e = twisted.edge_path("g"), twisted.edge_path("e")
    assert twisted.compose(g_edge, e).edges == ("f", "h")


def test_segment_examples(twisted):
    fh = twisted._word_path(("f", "h"))
    # color-ordered split: (f, h) = f . h
    assert twisted.segment(fh, D((1, 0)), D((1, 1))).edges == ("h",)
    # the other factorization is fh = ge, so the (0,1)-to-(1,1) piece is e
    assert twisted.segment(fh, D((0, 1)), D((1, 1))).edges == ("e",)
    v = twisted.segment(fh, D((0, 0)), D((0, 0)))
    assert v.is_vertex() and v.source == fh.range


def test_unique_factorization_roundtrip(coaligned_pool):
    rng = random.Random(3)
    for g in coaligned_pool:
        for _ in range(25):
            deg = D(rng.randrange(0, 3), rng.randrange(0, 3))
            paths = g.morphisms(deg)
            p = rng.choice(paths)
            m = D(rng.randrange(0, deg[0] + 1), rng.randrange(0, deg[1] + 1))
            head, tail = g.factor(p, m)
            assert g.compose(head, tail) == p
            assert g.segment(p, g.zero(), m) == head
            # three-way split glues back
            n = m.join(D(rng.randrange(0, deg[0] + 1), rng.randrange(0, deg[1] + 1)))
            mid = g.segment(p, m, n)
            assert g.compose_many(head, mid, g.segment(p, n, deg)) == p


def test_segment_of_composition(twisted):
    rng = random.Random(8)
    for _ in range(20):
        p = rng.choice(twisted.morphisms(D((1, 1))))
        q = rng.choice(twisted.paths_from(p.source, D((1, 0))))
        assert twisted.segment(twisted.compose(p, q), D((0, 0)), p.degree) == p


def test_segment_range_errors(twisted):
    p = twisted.morphisms(D((1, 0)))[0]
    with pytest.raises(Exception):
        twisted.segment(p, D((0, 1)), D((1, 1)))


# ---------------------------------------------------------------------------
# minimal common extensions


def brute_lambda_min(g, mu, nu):
    """Independent oracle: scan Lambda^{d(mu) v d(nu)} and match initial
    segments, then recover the extension pair by factoring."""
    join = mu.degree.join(nu.degree)
    out = []
    for w in g.morphisms(join):
        if g.segment(w, g.zero(), mu.degree) == mu and g.segment(w, g.zero(), nu.degree) == nu:
            xi = g.segment(w, mu.degree, join)
            eta = g.segment(w, nu.degree, join)
            out.append((xi, eta))
    return sorted(out)


def test_lambda_min_trivial_cases(twisted):
    lam = twisted.morphisms(D((1, 1)))[1]
    assert twisted.lambda_min(lam, lam) == (
        (twisted.vertex_path(lam.source), twisted.vertex_path(lam.source)),
    )
    mu, nu = twisted.morphisms(D((1, 0)))
    assert twisted.lambda_min(mu, nu) == ()  # same degree, different paths


def test_lambda_min_generator_pairs(twisted, commuting):
    e = twisted.edge_path("e")
    g_edge = twisted.edge_path("g")
    h = twisted.edge_path("h")
    # on the twisted graph the (e, g) corner has no common extension at all,
    # while (e, h) has two; both match the brute-force scan
    assert twisted.lambda_min(e, g_edge) == tuple(brute_lambda_min(twisted, e, g_edge))
    assert len(twisted.lambda_min(e, g_edge)) == 0
    assert len(twisted.lambda_min(e, h)) == 2
    # with all-commuting squares each mixed pair has exactly one
    ce, cg = commuting.edge_path("e"), commuting.edge_path("g")
    assert commuting.lambda_min(ce, cg) == tuple(brute_lambda_min(commuting, ce, cg))
    assert len(commuting.lambda_min(ce, cg)) == 1


def test_lambda_min_against_oracle_random(coaligned_pool):
    rng = random.Random(11)
    for g in coaligned_pool:
        pool = [p for d in D(1, 1).box() for p in g.morphisms(d)]
        for _ in range(20):
            mu, nu = rng.choice(pool), rng.choice(pool)
            assert list(g.lambda_min(mu, nu)) == brute_lambda_min(g, mu, nu)


def test_lambda_min_prefix_stripping(coaligned_pool):
    """Computing on the tails after removing the common prefix of degree
    d(mu) ^ d(nu) gives the same pair set."""
    rng = random.Random(29)
    for g in coaligned_pool:
        pool = [p for d in D(2, 1).box() for p in g.morphisms(d)]
        for _ in range(25):
            mu, nu = rng.choice(pool), rng.choice(pool)
            a = mu.degree.meet(nu.degree)
            mu1, mu2 = g.factor(mu, a)
            nu1, nu2 = g.factor(nu, a)
            direct = list(g.lambda_min(mu, nu))
            stripped = [] if mu1 != nu1 else list(g.lambda_min(mu2, nu2))
            assert direct == sorted(stripped)


# ---------------------------------------------------------------------------
# coalignedness and completion maps


def test_twisted_is_one_coaligned(twisted):
    ok, witness = twisted.is_one_coaligned()
    assert ok and witness is None


def test_k1_vacuously_coaligned(two_loops):
    assert two_loops.is_one_coaligned() == (True, None)


NON_COALIGNED_SQUARES = {
    # global bijection, but rho_g(e) = rho_g(f) = e
    ("e", "g"): ("g", "e"),
    ("f", "g"): ("h", "e"),
    ("e", "h"): ("g", "f"),
    ("f", "h"): ("h", "f"),
}


def test_non_bijective_completion_detected():
    g = single_vertex_2graph(["e", "f"], ["g", "h"], NON_COALIGNED_SQUARES)
    assert g.validate().valid  # a perfectly good 2-graph
    ok, witness = g.is_one_coaligned()
    assert not ok
    assert witness["solutions"] != 1
    bij = g.rho_bijectivity()
    assert not all(bij.values())


def test_rho_tables_on_twisted(twisted):
    rho = twisted.rho_maps()
    assert rho["g"] == {"e": "e", "f": "f"}  # identity
    assert rho["h"] == {"e": "f", "f": "e"}  # flip
    assert twisted.rho_bijectivity() == {"g": True, "h": True}


def test_rho_all_identity_on_commuting(commuting):
    for table in commuting.rho_maps().values():
        assert all(k == v for k, v in table.items())


def test_rho_agrees_with_coaligned_random():
    rng = random.Random(101)
    for _ in range(10):
        g = random_single_vertex_2graph(rng, rng.randrange(2, 4), 2)
        ok, _ = g.is_one_coaligned()
        assert ok == all(g.rho_bijectivity().values())


def test_rho_requires_single_vertex_2graph(two_loops, product_graph):
    with pytest.raises(Exception):
        two_loops.rho_maps()
    with pytest.raises(Exception):
        product_graph.rho_maps()


def test_unique_square_completion_for_coaligned(coaligned_pool):
    """The combinatorial shift *-commutation: every generator pair with a
    common source fills a unique degree-(e_i + e_j) square."""
    for g in coaligned_pool:
        for le in g.morphisms(g.unit(1)):
            for me in g.morphisms(g.unit(2)):
                if le.source != me.source:
                    continue
                assert len(g.coextension_count(le, me)) == 1


# ---------------------------------------------------------------------------
# vertex matrices


def test_vertex_matrices_examples(two_loops, twisted):
    assert two_loops.vertex_matrices() == [[[2]]]
    assert twisted.vertex_matrices() == [[[2]], [[2]]]
    g = KGraph(1, ["u", "v"], [Edge("a", 1, "u", "v"), Edge("b", 1, "v", "u")], {})
    assert g.vertex_matrices() == [[[0, 1], [1, 0]]]


def test_vertex_matrices_commute(product_graph):
    a1, a2 = product_graph.vertex_matrices()
    from kgraph_kms.kgraph import _matmul

    assert _matmul(a1, a2) == _matmul(a2, a1)


def test_no_sinks_sources_iff_no_zero_lines(coaligned_pool):
    for g in coaligned_pool:
        for m in g.vertex_matrices():
            assert all(any(row) for row in m)  # no zero row
            assert all(any(m[r][c] for r in range(len(m))) for c in range(len(m)))
