"""A normal-form calculus for finite sums of spanning elements
psi_m(x) psi_n(y)* of the Nica-Toeplitz algebra of a path-space shift.

Elements are stored blockwise by the degree pair (m, n), with each block
expanded over indicator bases at a common pair of depths, so equality is
coefficient equality after depth refinement.  Products are computed by the
frame rewriting identity for psi_n(y)* psi_p(s): first strip the common
prefix degree n ^ p, then expand over the indicator frames of the two
complementary fibres.  Everything is exact for exact weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .degrees import Degree
from .kgraph import KGraph, Path
from .pathspace import (
    CylinderFunction,
    decompose,
    ensure_one_coaligned,
    inner_product,
    left_act,
    multiply as ps_multiply,
    pullback,
)
from .scalars import conj, is_zero


@dataclass
class Block:
    """Coefficients of sum c_{lam,mu} psi_m(chi_lam) psi_n(chi_mu)* with
    lam at depth qx and mu at depth qy."""

    qx: Degree
    qy: Degree
    coeffs: Dict[Tuple[Path, Path], object]


class NTElement:
    __slots__ = ("graph", "blocks")

    def __init__(self, graph: KGraph, blocks: Optional[Dict[Tuple[Degree, Degree], Block]] = None):
        self.graph = graph
        self.blocks: Dict[Tuple[Degree, Degree], Block] = blocks or {}

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(graph: KGraph) -> "NTElement":
        return NTElement(graph)

    @staticmethod
    def term(graph: KGraph, coeff, m: Degree, x: CylinderFunction, n: Degree, y: CylinderFunction) -> "NTElement":
        """coeff * psi_m(x) psi_n(y)*, expanded over indicator bases and put
        in canonical form.

        Coefficient-algebra factors slide across the two legs
        (psi_m(x.a) psi_n(y)* = psi_m(x) psi_n(y.a*)*), so the raw pair
        expansion is not canonical.  Here the x-leg is truncated to depth
        exactly m and its tail pushed into the y-leg as a right action;
        pairs (head in Lambda^m, deep indicator) with incompatible sources
        then vanish on their own, and distinct heads act on disjoint
        cylinders in the Fock module, which makes this form unique."""
        from .pathspace import right_act

        out = NTElement(graph)
        if is_zero(coeff):
            return out
        g = graph
        zero = g.zero()
        if not x.depth >= m:
            x = x.refine(x.depth.join(m))
        qy = None
        coeffs: Dict[Tuple[Path, Path], object] = {}
        slid_cache: Dict[Path, CylinderFunction] = {}
        for lam, xw in x.weights.items():
            head = g.segment(lam, zero, m)
            tail = g.segment(lam, m, lam.degree)
            y_slid = slid_cache.get(tail)
            if y_slid is None:
                y_slid = right_act(y, CylinderFunction.indicator(g, tail, fiber=zero))
                slid_cache[tail] = y_slid
            qy = y_slid.depth if qy is None else qy.join(y_slid.depth)
            for mu, yw in y_slid.weights.items():
                c = coeff * xw * conj(yw)
                if not is_zero(c):
                    coeffs[(head, mu)] = coeffs.get((head, mu), 0) + c
        coeffs = {pair: c for pair, c in coeffs.items() if not is_zero(c)}
        if coeffs:
            # all tails have degree depth(x) - m, so the slid depths agree
            out.blocks[(m, n)] = Block(m, qy, coeffs)
        return out

    @staticmethod
    def one(graph: KGraph) -> "NTElement":
        u = CylinderFunction.one(graph)
        return NTElement.term(graph, 1, graph.zero(), u, graph.zero(), u)

    @staticmethod
    def generator(graph: KGraph, lam: Path) -> "NTElement":
        """S_lambda = psi_{d(lambda)}(chi_{Z(lambda)})."""
        return NTElement.term(
            graph, 1, lam.degree, CylinderFunction.indicator(graph, lam), graph.zero(), CylinderFunction.one(graph)
        )

    # -- linear structure --------------------------------------------------

    def _refined_block(self, key: Tuple[Degree, Degree], qx: Degree, qy: Degree) -> Dict[Tuple[Path, Path], object]:
        g = self.graph
        block = self.blocks[key]
        out: Dict[Tuple[Path, Path], object] = {}
        for (lam, mu), c in block.coeffs.items():
            lams = (
                [lam]
                if block.qx == qx
                else [g.compose(lam, r) for r in g.paths_from(lam.source, qx - block.qx)]
            )
            mus = (
                [mu]
                if block.qy == qy
                else [g.compose(mu, r) for r in g.paths_from(mu.source, qy - block.qy)]
            )
            for l2 in lams:
                for m2 in mus:
                    out[(l2, m2)] = out.get((l2, m2), 0) + c
        return out

    def __add__(self, other: "NTElement") -> "NTElement":
        out = NTElement(self.graph)
        for key in set(self.blocks) | set(other.blocks):
            parts = []
            qx = qy = None
            for src in (self, other):
                if key in src.blocks:
                    b = src.blocks[key]
                    qx = b.qx if qx is None else qx.join(b.qx)
                    qy = b.qy if qy is None else qy.join(b.qy)
            for src in (self, other):
                if key in src.blocks:
                    parts.append(src._refined_block(key, qx, qy))
            coeffs: Dict[Tuple[Path, Path], object] = {}
            for part in parts:
                for pair, c in part.items():
                    coeffs[pair] = coeffs.get(pair, 0) + c
            coeffs = {pair: c for pair, c in coeffs.items() if not is_zero(c)}
            if coeffs:
                out.blocks[key] = Block(qx, qy, coeffs)
        return out

    def scale(self, c) -> "NTElement":
        if is_zero(c):
            return NTElement(self.graph)
        out = NTElement(self.graph)
        for key, b in self.blocks.items():
            out.blocks[key] = Block(b.qx, b.qy, {p: c * v for p, v in b.coeffs.items()})
        return out

    def __sub__(self, other: "NTElement") -> "NTElement":
        return self + other.scale(-1)

    def adjoint(self) -> "NTElement":
        """(psi_m(x) psi_n(y)*)* = psi_n(y) psi_m(x)*, re-canonicalized
        (the deep y-leg becomes the x-leg and must be truncated again)."""
        g = self.graph
        out = NTElement(g)
        for (m, n), b in self.blocks.items():
            for (lam, mu), c in b.coeffs.items():
                out = out + NTElement.term(
                    g,
                    conj(c),
                    n,
                    CylinderFunction.indicator(g, mu, fiber=n),
                    m,
                    CylinderFunction.indicator(g, lam, fiber=m),
                )
        return out

    def is_zero_element(self) -> bool:
        return not self.blocks

    def __eq__(self, other) -> bool:
        if not isinstance(other, NTElement):
            return NotImplemented
        return (self - other).is_zero_element()

    def __hash__(self):
        raise TypeError("NTElement is unhashable")

    def degree_pairs(self) -> List[Tuple[Degree, Degree]]:
        return sorted(self.blocks, key=lambda mn: (mn[0].entries, mn[1].entries))

    def term_count(self) -> int:
        return sum(len(b.coeffs) for b in self.blocks.values())

    def __repr__(self):
        parts = []
        for (m, n), b in self.blocks.items():
            parts.append(f"({m},{n}): {len(b.coeffs)} coeffs at depths ({b.qx},{b.qy})")
        return "NT{" + "; ".join(parts) + "}"

    def serializable(self) -> list:
        """(m, n, lam, mu, coeff) records."""
        from .scalars import to_complex

        out = []
        for (m, n), b in self.blocks.items():
            for (lam, mu), c in sorted(b.coeffs.items()):
                z = to_complex(c)
                out.append(
                    {
                        "m": list(m.entries),
                        "n": list(n.entries),
                        "lam": list(lam.edges) or [lam.source],
                        "mu": list(mu.edges) or [mu.source],
                        "coeff": [z.real, z.imag],
                    }
                )
        return out


# ---------------------------------------------------------------------------
# products


def cross_core(y: CylinderFunction, s: CylinderFunction) -> NTElement:
    """psi_N(y)* psi_P(s) for coprime degrees N ^ P = 0, rewritten over the
    indicator frames: the sum over xi in Lambda^P, eta in Lambda^N of
    psi_P(<y, chi_{Z(eta)} o sigma^P> . chi_{Z(xi)})
    psi_N(<s, chi_{Z(xi)} o sigma^N> . chi_{Z(eta)})*."""
    g = y.graph
    nn, pp = y.fiber, s.fiber
    if not nn.meet(pp).is_zero():
        raise ValueError(f"cross_core needs coprime degrees, got {nn}, {pp}")
    ensure_one_coaligned(g)
    out = NTElement(g)
    for xi in g.morphisms(pp):
        shifted_xi = pullback(CylinderFunction.indicator(g, xi), nn).in_fiber(pp)
        second_base = inner_product(s, shifted_xi)
        if second_base.is_zero_function():
            continue
        for eta in g.morphisms(nn):
            shifted_eta = pullback(CylinderFunction.indicator(g, eta), pp).in_fiber(nn)
            first = left_act(inner_product(y, shifted_eta), CylinderFunction.indicator(g, xi, fiber=pp))
            if first.is_zero_function():
                continue
            second = left_act(second_base, CylinderFunction.indicator(g, eta, fiber=nn))
            if second.is_zero_function():
                continue
            out = out + NTElement.term(g, 1, pp, first, nn, second)
    return out


def cross_product(y: CylinderFunction, s: CylinderFunction) -> NTElement:
    """psi_n(y)* psi_p(s) as a sum of spanning elements of degrees
    (p - n^p, n - n^p): strip the common prefix degree a = n ^ p through the
    inner product on X_a, then rewrite the coprime remainder."""
    g = y.graph
    n, p = y.fiber, s.fiber
    a = n.meet(p)
    if a.is_zero():
        return cross_core(y, s)
    nn, pp = n - a, p - a
    out = NTElement(g)
    for y2, y1 in decompose(y, a, nn):
        for s2, s1 in decompose(s, a, pp):
            mid = inner_product(y2, s2)
            if mid.is_zero_function():
                continue
            out = out + cross_core(y1.in_fiber(nn), left_act(mid, s1.in_fiber(pp)))
    return out


def _basis_cross(g: KGraph, n: Degree, mu: Path, p: Degree, rho: Path) -> NTElement:
    cache = getattr(g, "_cross_cache", None)
    if cache is None:
        cache = {}
        setattr(g, "_cross_cache", cache)
    key = (n, mu, p, rho)
    got = cache.get(key)
    if got is None:
        got = cross_product(
            CylinderFunction.indicator(g, mu, fiber=n), CylinderFunction.indicator(g, rho, fiber=p)
        )
        cache[key] = got
    return got


def nt_multiply(e1: NTElement, e2: NTElement) -> NTElement:
    """The product in NT(X): bilinear over blocks, with the middle factor
    psi_n(chi_mu)* psi_p(chi_rho) rewritten by cross_product.  Every output
    term has degrees (m + p - n^p, n' + q - n^p) as the degree bookkeeping
    demands."""
    g = e1.graph
    out = NTElement(g)
    for (m, n), b1 in e1.blocks.items():
        for (p, q), b2 in e2.blocks.items():
            for (lam, mu), c1 in b1.coeffs.items():
                x1 = CylinderFunction.indicator(g, lam, fiber=m)
                for (rho, tau), c2 in b2.coeffs.items():
                    c = c1 * c2
                    if is_zero(c):
                        continue
                    mid = _basis_cross(g, n, mu, p, rho)
                    y2 = CylinderFunction.indicator(g, tau, fiber=q)
                    for (pp, nn), bm in mid.blocks.items():
                        for (a_path, b_path), c3 in bm.coeffs.items():
                            new_x = ps_multiply(x1, CylinderFunction.indicator(g, a_path, fiber=pp))
                            if new_x.is_zero_function():
                                continue
                            new_y = ps_multiply(y2, CylinderFunction.indicator(g, b_path, fiber=nn))
                            if new_y.is_zero_function():
                                continue
                            out = out + NTElement.term(g, c * c3, m + pp, new_x, q + nn, new_y)
    return out


def tck_family(g: KGraph, max_degree: Degree) -> Dict[Path, NTElement]:
    """The family S_lambda = psi_{d(lambda)}(chi_{Z(lambda)}) for all
    lambda of degree <= max_degree."""
    g.require_valid()
    ensure_one_coaligned(g)
    fam: Dict[Path, NTElement] = {}
    for ndeg in max_degree.box():
        for lam in g.morphisms(ndeg):
            fam[lam] = NTElement.generator(g, lam)
    return fam
