"""Two concrete representations used to certify operator identities.

* The Fock representation acts on finitely supported families (X_p)_p by
  creation operators T(x) and their adjoints; the induced homomorphism on
  the Nica-Toeplitz algebra is faithful, so two spanning-element expressions
  are equal iff they agree on enough Fock basis vectors.  Because every
  operator here commutes with the right coefficient action, agreement on the
  depth-p indicator basis of X_p certifies agreement on all of X_p, and
  agreement on the box of components up to the join of the annihilator
  degrees propagates to every component; the window check below is
  therefore exact, not a heuristic.

* The path-space representation acts on cylinder functions with the
  Cuntz-Krieger quotient relations; kernel generators of the quotient act
  as zero there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .degrees import Degree
from .kgraph import KGraph, Path
from .nt import NTElement
from .pathspace import (
    CylinderFunction,
    decompose,
    inner_product,
    left_act,
    multiply as ps_multiply,
)
from .scalars import is_zero


class WindowOverflowError(Exception):
    """A creation operator pushed a nonzero component past the window."""


class FockVector:
    """A finitely supported element of the Fock module, componentwise a
    cylinder function in the fibre X_p.  ``window``, when set, bounds the
    degrees a creation operator may reach."""

    __slots__ = ("graph", "components", "window")

    def __init__(self, graph: KGraph, components: Dict[Degree, CylinderFunction], window: Optional[Degree] = None):
        self.graph = graph
        self.components = {p: cf for p, cf in components.items() if not cf.is_zero_function()}
        self.window = window

    @staticmethod
    def basis(graph: KGraph, p: Degree, lam: Path, window: Optional[Degree] = None) -> "FockVector":
        """chi_{Z(lambda)} placed in the X_p component (d(lambda) >= p)."""
        if not lam.degree >= p:
            raise ValueError(f"basis path of degree {lam.degree} too shallow for fibre {p}")
        return FockVector(graph, {p: CylinderFunction.indicator(graph, lam, fiber=p)}, window)

    def __add__(self, other: "FockVector") -> "FockVector":
        out = dict(self.components)
        for p, cf in other.components.items():
            out[p] = out[p] + cf if p in out else cf
        return FockVector(self.graph, out, self.window)

    def scale(self, c) -> "FockVector":
        return FockVector(self.graph, {p: cf.scale(c) for p, cf in self.components.items()}, self.window)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FockVector):
            return NotImplemented
        keys = set(self.components) | set(other.components)
        for p in keys:
            a = self.components.get(p)
            b = other.components.get(p)
            if a is None or b is None:
                if (a or b).is_zero_function():
                    continue
                return False
            if not (a == b):
                return False
        return True

    def __hash__(self):
        raise TypeError("FockVector is unhashable")

    def is_zero_vector(self) -> bool:
        return not self.components

    def __repr__(self):
        return "Fock{" + "; ".join(f"{p}: {len(cf.weights)}w" for p, cf in sorted(self.components.items(), key=lambda kv: kv[0].entries)) + "}"


def fock_create(x: CylinderFunction, v: FockVector) -> FockVector:
    """T(x): the X_p component is sent to x . component in X_{p + d(x)}."""
    out: Dict[Degree, CylinderFunction] = {}
    m = x.fiber
    for p, cf in v.components.items():
        target = p + m
        prod = ps_multiply(x, cf.in_fiber(p))
        if prod.is_zero_function():
            continue
        if v.window is not None and not target <= v.window:
            raise WindowOverflowError(f"creation by degree {m} leaves the window at component {p}")
        out[target] = out[target] + prod if target in out else prod
    return FockVector(v.graph, out, v.window)


def fock_annihilate(y: CylinderFunction, v: FockVector) -> FockVector:
    """T(y)*: zero on X_p unless p >= d(y); otherwise decompose the
    component as sum of simple tensors chi (x) tail and map to
    <y, chi> . tail in X_{p - d(y)}."""
    out: Dict[Degree, CylinderFunction] = {}
    n = y.fiber
    for p, cf in v.components.items():
        if not p >= n:
            continue
        target = p - n
        for head, tail in decompose(cf.in_fiber(p), n, target):
            a = inner_product(y, head)
            if a.is_zero_function():
                continue
            term = left_act(a, tail.in_fiber(target))
            if term.is_zero_function():
                continue
            out[target] = out[target] + term if target in out else term
    return FockVector(v.graph, out, v.window)


# An operator expression is a list of (coeff, word); a word is a list of
# ("c", x) / ("a", y) factors in written order, applied right to left.
OpWord = List[Tuple[str, CylinderFunction]]
OpExpr = List[Tuple[object, OpWord]]


def apply_word(word: OpWord, v: FockVector) -> FockVector:
    for kind, cf in reversed(word):
        if v.is_zero_vector():
            return v
        v = fock_create(cf, v) if kind == "c" else fock_annihilate(cf, v)
    return v


def apply_expr(expr: OpExpr, v: FockVector) -> FockVector:
    out = FockVector(v.graph, {}, v.window)
    for coeff, word in expr:
        if is_zero(coeff):
            continue
        out = out + apply_word(word, v).scale(coeff)
    return out


def element_expr(e: NTElement) -> OpExpr:
    g = e.graph
    expr: OpExpr = []
    for (m, n), b in e.blocks.items():
        for (lam, mu), c in b.coeffs.items():
            word: OpWord = [
                ("c", CylinderFunction.indicator(g, lam, fiber=m)),
                ("a", CylinderFunction.indicator(g, mu, fiber=n)),
            ]
            expr.append((c, word))
    return expr


def fock_apply_element(e: NTElement, v: FockVector) -> FockVector:
    return apply_expr(element_expr(e), v)


def expr_degrees(expr: OpExpr) -> Degree:
    """Join of every creation and annihilation degree in the expression."""
    join = None
    for _, word in expr:
        for _, cf in word:
            join = cf.fiber if join is None else join.join(cf.fiber)
    if join is None:
        raise ValueError("expression has no factors")
    return join


def operators_equal_on_window(
    expr1: OpExpr,
    expr2: OpExpr,
    window: Optional[Degree] = None,
    margin: Optional[Degree] = None,
    graph: Optional[KGraph] = None,
) -> Tuple[bool, Optional[dict]]:
    """Exact equality of two operator expressions on the Fock module.

    The default window is the join of all degrees in both expressions plus
    (1,...,1); agreement on the indicator bases of the components in that box
    is equivalent to equality of the operators (see module docstring).
    Returns (equal, witness); the witness names the first basis vector where
    the two sides differ."""
    g = graph
    if g is None:
        for _, word in expr1 + expr2:
            if word:
                g = word[0][1].graph
                break
    if g is None:
        raise ValueError("cannot infer the graph from empty expressions")
    if window is None:
        window = expr_degrees(expr1 + expr2)
        window = window + (margin if margin is not None else g.ones())
    for p in window.box():
        for lam in g.morphisms(p):
            v = FockVector.basis(g, p, lam)
            a = apply_expr(expr1, v)
            b = apply_expr(expr2, v)
            if not (a == b):
                return False, {"component": str(p), "basis_path": repr(lam)}
    return True, None


def elements_equal_via_fock(e1: NTElement, e2: NTElement, margin: Optional[Degree] = None) -> Tuple[bool, Optional[dict]]:
    expr1, expr2 = element_expr(e1), element_expr(e2)
    if not expr1 and not expr2:
        return True, None
    return operators_equal_on_window(expr1, expr2, margin=margin, graph=e1.graph)


def frame_projection_expr(g: KGraph, m: Degree) -> OpExpr:
    """sum over xi in Lambda^m of T(chi_xi) T(chi_xi)*."""
    expr: OpExpr = []
    for xi in g.morphisms(m):
        cf = CylinderFunction.indicator(g, xi, fiber=m)
        expr.append((1, [("c", cf), ("a", cf)]))
    return expr


def compose_exprs(expr1: OpExpr, expr2: OpExpr) -> OpExpr:
    return [(c1 * c2, w1 + w2) for c1, w1 in expr1 for c2, w2 in expr2]


def check_nica_covariance(g: KGraph, m: Degree, p: Degree, window: Optional[Degree] = None) -> Tuple[bool, Optional[dict]]:
    """Q_m Q_p = Q_{m v p} for the frame projections Q_n = sum_xi T(chi_xi)
    T(chi_xi)*, checked exactly on a window."""
    lhs = compose_exprs(frame_projection_expr(g, m), frame_projection_expr(g, p))
    rhs = frame_projection_expr(g, m.join(p))
    return operators_equal_on_window(lhs, rhs, window=window, graph=g)


def check_frame_dichotomy(g: KGraph, n: Degree, window: Degree) -> Tuple[bool, Optional[dict]]:
    """sum_{lam in Lambda^n} T(chi_lam) T(chi_lam)* is the identity on X_m
    for m >= n and zero otherwise."""
    expr = frame_projection_expr(g, n)
    for p in window.box():
        expect_identity = p >= n
        for lam in g.morphisms(p):
            v = FockVector.basis(g, p, lam)
            got = apply_expr(expr, v)
            want = v if expect_identity else FockVector(g, {})
            if not (got == want):
                return False, {"component": str(p), "basis_path": repr(lam)}
    return True, None


# ---------------------------------------------------------------------------
# the path-space (Cuntz-Krieger level) representation


def path_create(x: CylinderFunction, a: CylinderFunction) -> CylinderFunction:
    """pi(psi_m(x)) a = x . (a o sigma^m), a cylinder function again."""
    return ps_multiply(x, a.in_fiber(x.graph.zero())).in_fiber(x.graph.zero())


def path_annihilate(y: CylinderFunction, a: CylinderFunction) -> CylinderFunction:
    """pi(psi_n(y))* a: z maps to the sum of conj(y(w)) a(w) over the
    degree-n shift preimages w of z."""
    return inner_product(y, a.in_fiber(y.fiber))


def path_apply_word(word: OpWord, a: CylinderFunction) -> CylinderFunction:
    for kind, cf in reversed(word):
        a = path_create(cf, a) if kind == "c" else path_annihilate(cf, a)
    return a


def path_apply_expr(expr: OpExpr, a: CylinderFunction) -> CylinderFunction:
    g = a.graph
    out = CylinderFunction(g, g.zero(), g.zero(), {})
    for coeff, word in expr:
        if is_zero(coeff):
            continue
        out = out + path_apply_word(word, a).scale(coeff)
    return out


def path_apply_element(e: NTElement, a: CylinderFunction) -> CylinderFunction:
    return path_apply_expr(element_expr(e), a)


def path_operators_equal(
    expr1: OpExpr, expr2: OpExpr, g: KGraph, depth: Degree
) -> Tuple[bool, Optional[dict]]:
    """Equality of two expressions as operators on cylinder functions,
    checked on the depth-``depth`` indicator basis (operators here commute
    with right multiplication, so that basis spans enough)."""
    for lam in g.morphisms(depth):
        a = CylinderFunction.indicator(g, lam, fiber=g.zero())
        if not (path_apply_expr(expr1, a) == path_apply_expr(expr2, a)):
            return False, {"basis_path": repr(lam)}
    return True, None


def kernel_generator(g: KGraph, a: CylinderFunction, n: Degree) -> NTElement:
    """psi_0(a) - sum_xi psi_n(a . chi_xi) psi_n(chi_xi)*, a generator of the
    kernel of the quotient onto the Cuntz-Pimsner algebra."""
    one = CylinderFunction.one(g)
    e = NTElement.term(g, 1, g.zero(), a, g.zero(), one)
    for xi in g.morphisms(n):
        ind = CylinderFunction.indicator(g, xi, fiber=n)
        e = e - NTElement.term(g, 1, n, left_act(a, ind), n, ind)
    return e
