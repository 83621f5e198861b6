"""Cylinder functions on the infinite-path space and the product system they
span: inner products, module actions, multiplication, decomposition into
simple tensors, Parseval frames, and the flip map.

A cylinder function of depth q is a locally constant function determined by
its values on the cylinders Z(lambda), lambda in Lambda^q.  The same weight
table can be read as an element of any fibre X_m; the fibre only changes
which shift enters the inner product and the multiplication.  All operations
here are exact when the weights are exact (int, Fraction, QC).
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .degrees import Degree
from .kgraph import KGraph, Path
from .scalars import conj, is_zero


class FiberMismatchError(Exception):
    pass


class CylinderFunction:
    __slots__ = ("graph", "fiber", "depth", "weights")

    def __init__(self, graph: KGraph, fiber: Degree, depth: Degree, weights: Dict[Path, object]):
        self.graph = graph
        self.fiber = fiber
        self.depth = depth
        self.weights = {p: w for p, w in weights.items() if not is_zero(w)}

    # -- construction ---------------------------------------------------

    @staticmethod
    def indicator(graph: KGraph, lam: Path, fiber: Optional[Degree] = None) -> "CylinderFunction":
        """chi_{Z(lambda)}, by default in the fibre X_{d(lambda)}."""
        return CylinderFunction(graph, fiber if fiber is not None else lam.degree, lam.degree, {lam: 1})

    @staticmethod
    def one(graph: KGraph, fiber: Optional[Degree] = None) -> "CylinderFunction":
        """The constant function 1 (depth 0)."""
        z = graph.zero()
        return CylinderFunction(
            graph, fiber if fiber is not None else z, z, {graph.vertex_path(v): 1 for v in graph.vertices}
        )

    def in_fiber(self, m: Degree) -> "CylinderFunction":
        return CylinderFunction(self.graph, m, self.depth, self.weights)

    # -- basic structure -------------------------------------------------

    def is_zero_function(self) -> bool:
        return not self.weights

    def value_on(self, path: Path):
        """The constant value on Z(path); requires d(path) >= depth."""
        if not path.degree >= self.depth:
            raise ValueError(f"path depth {path.degree} shallower than function depth {self.depth}")
        key = path if path.degree == self.depth else self.graph.segment(path, self.graph.zero(), self.depth)
        return self.weights.get(key, 0)

    def refine(self, q: Degree) -> "CylinderFunction":
        if q == self.depth:
            return self
        if not q >= self.depth:
            raise ValueError(f"cannot refine depth {self.depth} to shallower {q}")
        g = self.graph
        out: Dict[Path, object] = {}
        ext = q - self.depth
        for lam, w in self.weights.items():
            for rho in g.paths_from(lam.source, ext):
                out[g.compose(lam, rho)] = w
        return CylinderFunction(g, self.fiber, q, out)

    def __add__(self, other: "CylinderFunction") -> "CylinderFunction":
        q = self.depth.join(other.depth)
        a, b = self.refine(q), other.refine(q)
        out = dict(a.weights)
        for p, w in b.weights.items():
            out[p] = out.get(p, 0) + w
        return CylinderFunction(self.graph, self.fiber, q, out)

    def __sub__(self, other: "CylinderFunction") -> "CylinderFunction":
        return self + other.scale(-1)

    def scale(self, c) -> "CylinderFunction":
        return CylinderFunction(self.graph, self.fiber, self.depth, {p: c * w for p, w in self.weights.items()})

    def conjugate(self) -> "CylinderFunction":
        return CylinderFunction(self.graph, self.fiber, self.depth, {p: conj(w) for p, w in self.weights.items()})

    def pointwise(self, other: "CylinderFunction") -> "CylinderFunction":
        """Pointwise product as functions (both read at the joined depth)."""
        q = self.depth.join(other.depth)
        a, b = self.refine(q), other.refine(q)
        out = {}
        for p, w in a.weights.items():
            v = b.weights.get(p)
            if v is not None:
                out[p] = w * v
        return CylinderFunction(self.graph, self.fiber, q, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CylinderFunction):
            return NotImplemented
        q = self.depth.join(other.depth)
        a, b = self.refine(q), other.refine(q)
        return a.weights == b.weights

    def __hash__(self):
        raise TypeError("CylinderFunction is unhashable (depth-refinement equality)")

    def __repr__(self):
        entries = ", ".join(f"{p!r}:{w}" for p, w in sorted(self.weights.items(), key=lambda kv: kv[0]))
        return f"CF[fiber {self.fiber}, depth {self.depth}]{{{entries}}}"


# ---------------------------------------------------------------------------
# bimodule operations


def inner_product(x: CylinderFunction, y: CylinderFunction) -> CylinderFunction:
    """<x, y>(z) = sum over the degree-m shift preimages w of z of
    conj(x(w)) y(w); an element of the coefficient algebra (fibre 0)."""
    if x.fiber != y.fiber:
        raise FiberMismatchError(f"inner product needs equal fibres, got {x.fiber} and {y.fiber}")
    g = x.graph
    m = x.fiber
    q = x.depth.join(y.depth).join(m)
    xr, yr = x.refine(q), y.refine(q)
    out: Dict[Path, object] = {}
    for w, xv in xr.weights.items():
        yv = yr.weights.get(w)
        if yv is None:
            continue
        tail = g.segment(w, m, q)
        out[tail] = out.get(tail, 0) + conj(xv) * yv
    return CylinderFunction(g, g.zero(), q - m, out)


def left_act(a: CylinderFunction, x: CylinderFunction) -> CylinderFunction:
    """(a.x)(z) = a(z) x(z) for a in the coefficient algebra."""
    return x.pointwise(a).in_fiber(x.fiber)


def pullback(b: CylinderFunction, m: Degree) -> CylinderFunction:
    """b o sigma^m, a function of depth m + depth(b); the fibre tag is kept."""
    g = b.graph
    q = m + b.depth
    out: Dict[Path, object] = {}
    for lam, w in b.weights.items():
        for head in g.paths_into(lam.range, m):
            out[g.compose(head, lam)] = w
    return CylinderFunction(g, b.fiber, q, out)


def right_act(x: CylinderFunction, b: CylinderFunction) -> CylinderFunction:
    """(x.b)(z) = x(z) b(sigma^m z) for x in the fibre X_m."""
    return x.pointwise(pullback(b, x.fiber)).in_fiber(x.fiber)


def multiply(x: CylinderFunction, y: CylinderFunction) -> CylinderFunction:
    """The product-system multiplication (xy)(z) = x(z) y(sigma^m z),
    landing in the fibre X_{m+n}."""
    g = x.graph
    m, n = x.fiber, y.fiber
    q = x.depth.join(m + y.depth)
    xr = x.refine(q)
    out: Dict[Path, object] = {}
    for w, xv in xr.weights.items():
        tail = g.segment(w, m, m + y.depth)
        yv = y.weights.get(tail, 0)
        if not is_zero(yv):
            out[w] = xv * yv
    return CylinderFunction(g, m + n, q, out)


def decompose(
    z: CylinderFunction, m: Degree, n: Degree
) -> List[Tuple[CylinderFunction, CylinderFunction]]:
    """Write z in X_{m+n} as a list of simple tensors (chi_{Z(xi)}, y_xi)
    with y_xi(w) = z(xi w); multiplying each pair and summing returns z."""
    g = z.graph
    if z.fiber != m + n:
        raise FiberMismatchError(f"decompose expects fibre {m + n}, got {z.fiber}")
    q = z.depth.join(m)
    zr = z.refine(q)
    tails: Dict[Path, Dict[Path, object]] = {}
    for w, v in zr.weights.items():
        head = g.segment(w, g.zero(), m)
        tail = g.segment(w, m, q)
        tails.setdefault(head, {})[tail] = v
    out = []
    for xi in sorted(tails):
        out.append(
            (
                CylinderFunction.indicator(g, xi, fiber=m),
                CylinderFunction(g, n, q - m, tails[xi]),
            )
        )
    return out


def tensor_sum(tensors: Sequence[Tuple[CylinderFunction, CylinderFunction]]) -> CylinderFunction:
    """Map a list of simple tensors in X_m (x) X_n to its image in X_{m+n}.
    The multiplication map is an isomorphism, so this is the canonical way
    to compare tensor expressions."""
    if not tensors:
        raise ValueError("empty tensor list")
    out = multiply(tensors[0][0], tensors[0][1])
    for x, y in tensors[1:]:
        out = out + multiply(x, y)
    return out


def tensor_inner(
    s: Tuple[CylinderFunction, CylinderFunction], t: Tuple[CylinderFunction, CylinderFunction]
) -> CylinderFunction:
    """<x (x) y, z (x) w> = <y, <x,z>.w> on simple tensors."""
    x, y = s
    z, w = t
    return inner_product(y, left_act(inner_product(x, z), w))


# ---------------------------------------------------------------------------
# frames and the flip


class Frame:
    """A finite family of vectors in a fibre, meant to be Parseval."""

    def __init__(self, fiber: Degree, elements: Sequence[CylinderFunction]):
        self.fiber = fiber
        self.elements = list(elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def reconstructs(self, x: CylinderFunction) -> bool:
        """Exact check of the reconstruction identity sum_i x_i <x_i, x> = x."""
        acc = None
        for xi in self.elements:
            term = right_act(xi, inner_product(xi, x))
            acc = term if acc is None else acc + term
        return acc == x


def standard_frame(graph: KGraph, m: Degree) -> Frame:
    """{chi_{Z(xi)} : xi in Lambda^m}, a Parseval frame for X_m."""
    return Frame(m, [CylinderFunction.indicator(graph, xi) for xi in graph.morphisms(m)])


def shifted_frame(graph: KGraph, m: Degree, n: Degree) -> Frame:
    """{chi_{Z(xi)} o sigma^n : xi in Lambda^m}, a Parseval frame for X_m
    when m ^ n = 0 on a 1-coaligned graph."""
    if not m.meet(n).is_zero():
        raise ValueError(f"shifted frame needs m ^ n = 0, got {m}, {n}")
    ensure_one_coaligned(graph)
    els = []
    for xi in graph.morphisms(m):
        els.append(pullback(CylinderFunction.indicator(graph, xi), n).in_fiber(m))
    return Frame(m, els)


def flip(
    x: CylinderFunction, y: CylinderFunction
) -> List[Tuple[CylinderFunction, CylinderFunction]]:
    """The flip X_m (x) X_n -> X_n (x) X_m, computed by multiplying and
    decomposing the other way. Requires m ^ n = 0 on a 1-coaligned graph."""
    m, n = x.fiber, y.fiber
    if not m.meet(n).is_zero():
        raise ValueError(f"flip needs m ^ n = 0, got {m}, {n}")
    ensure_one_coaligned(x.graph)
    return decompose(multiply(x, y), n, m)


_coaligned_cache: Dict[int, bool] = {}


def ensure_one_coaligned(graph: KGraph) -> None:
    key = id(graph)
    ok = _coaligned_cache.get(key)
    if ok is None:
        ok, _ = graph.is_one_coaligned()
        _coaligned_cache[key] = ok
    if not ok:
        raise ValueError("operation requires a 1-coaligned graph")


def theta_apply(x: CylinderFunction, y: CylinderFunction, z: CylinderFunction) -> CylinderFunction:
    """The rank-one operator Theta_{x,y} z = x . <y, z>."""
    return right_act(x, inner_product(y, z))
