"""Ready-made k-graphs: small named examples and random generators.

The random single-vertex 2-graphs are built from two families of
permutations; the construction below always yields a bijective square table
whose completion property holds, so every sample is a valid 1-coaligned
graph.  Products of two 1-graphs give multi-vertex 1-coaligned 2-graphs.
"""

from __future__ import annotations

import random
from typing import Dict, List, Sequence, Tuple

from .kgraph import Edge, KGraph


def one_vertex_loops(n_loops: int, names: Sequence[str] = ()) -> KGraph:
    """A 1-graph with a single vertex and n loops."""
    ids = list(names) if names else [f"a{t}" for t in range(n_loops)]
    edges = [Edge(e, 1, "v", "v") for e in ids]
    return KGraph(1, ["v"], edges, {})


def cycle_1graph(n_vertices: int) -> KGraph:
    """A 1-graph that is a single directed n-cycle."""
    vs = [f"v{t}" for t in range(n_vertices)]
    edges = [Edge(f"c{t}", 1, vs[t], vs[(t + 1) % n_vertices]) for t in range(n_vertices)]
    return KGraph(1, vs, edges, {})


def single_vertex_2graph(
    loops1: Sequence[str],
    loops2: Sequence[str],
    square_map: Dict[Tuple[str, str], Tuple[str, str]],
) -> KGraph:
    edges = [Edge(e, 1, "v", "v") for e in loops1] + [Edge(f, 2, "v", "v") for f in loops2]
    return KGraph(2, ["v"], edges, square_map)


def twisted_2x2() -> KGraph:
    """Single vertex, loops e,f (color 1) and g,h (color 2), with
    eg=he, eh=hf, fg=gf, fh=ge.  One of the completion maps is a flip,
    the other the identity; the graph is 1-coaligned."""
    squares = {
        ("e", "g"): ("h", "e"),
        ("e", "h"): ("h", "f"),
        ("f", "g"): ("g", "f"),
        ("f", "h"): ("g", "e"),
    }
    return single_vertex_2graph(["e", "f"], ["g", "h"], squares)


def commuting_2x2() -> KGraph:
    """Single vertex, two loops per color, all squares commuting: xy = yx."""
    squares = {
        (e, f): (f, e) for e in ("e", "f") for f in ("g", "h")
    }
    return single_vertex_2graph(["e", "f"], ["g", "h"], squares)


def random_single_vertex_2graph(rng: random.Random, n1: int = 2, n2: int = 2) -> KGraph:
    """A random valid 1-coaligned single-vertex 2-graph.

    The square table (e, f) -> (psi_{pi_f(e)}(f), pi_f(e)) is a bijection for
    any choice of permutations pi_f of the color-1 loops and psi_e of the
    color-2 loops, and each completion map rho_f = pi_f is bijective.
    """
    loops1 = [f"a{t}" for t in range(n1)]
    loops2 = [f"b{t}" for t in range(n2)]
    pi = {f: rng.sample(loops1, n1) for f in loops2}  # pi[f][index of e]
    psi = {e: rng.sample(loops2, n2) for e in loops1}
    idx1 = {e: t for t, e in enumerate(loops1)}
    idx2 = {f: t for t, f in enumerate(loops2)}
    squares = {}
    for e in loops1:
        for f in loops2:
            e_prime = pi[f][idx1[e]]
            f_prime = psi[e_prime][idx2[f]]
            squares[(e, f)] = (f_prime, e_prime)
    return single_vertex_2graph(loops1, loops2, squares)


def product_2graph(g1: KGraph, g2: KGraph) -> KGraph:
    """The product 2-graph of two 1-graphs, with commuting squares.

    Color-1 edges are (edge of g1, vertex of g2); color-2 edges the reverse.
    Product graphs are always 1-coaligned.
    """
    if g1.k != 1 or g2.k != 1:
        raise ValueError("product_2graph expects two 1-graphs")
    vs = [f"{u}|{w}" for u in g1.vertices for w in g2.vertices]
    edges: List[Edge] = []
    for e in g1.edges.values():
        for w in g2.vertices:
            edges.append(Edge(f"{e.eid}|{w}", 1, f"{e.source}|{w}", f"{e.range}|{w}"))
    for u in g1.vertices:
        for f in g2.edges.values():
            edges.append(Edge(f"{u}|{f.eid}", 2, f"{u}|{f.source}", f"{u}|{f.range}"))
    squares = {}
    for e in g1.edges.values():
        for f in g2.edges.values():
            # word (e at r(f)) then (s(e) at f); the commuting completion
            a = f"{e.eid}|{f.range}"
            b = f"{e.source}|{f.eid}"
            squares[(a, b)] = (f"{e.range}|{f.eid}", f"{e.eid}|{f.source}")
    return KGraph(2, vs, edges, squares)


def random_1graph(rng: random.Random, n_vertices: int, max_multiplicity: int = 2) -> KGraph:
    """A random 1-graph with no sources or sinks: a covering cycle plus
    random extra edges."""
    vs = [f"v{t}" for t in range(n_vertices)]
    edges = [Edge(f"c{t}", 1, vs[t], vs[(t + 1) % n_vertices]) for t in range(n_vertices)]
    count = n_vertices
    for u in vs:
        for w in vs:
            for _ in range(rng.randrange(max_multiplicity)):
                edges.append(Edge(f"x{count}", 1, u, w))
                count += 1
    return KGraph(1, vs, edges, {})


def random_product_2graph(rng: random.Random, n1: int = 2, n2: int = 2) -> KGraph:
    return product_2graph(random_1graph(rng, n1), random_1graph(rng, n2))
