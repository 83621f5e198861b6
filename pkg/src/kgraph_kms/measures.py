"""Measures on the infinite-path space, stored as consistent cylinder weights.

A measure is anything that can report the mass of every cylinder Z(lambda)
it has data for.  Table-backed measures marginalize shallower levels from a
stored deeper level; formula-backed measures (transfer images, linear
combinations, point masses) compute weights on demand.  Consistency in every
direction, weight(mu) = sum over one-edge extensions, is checkable exactly.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .degrees import Degree
from .kgraph import KGraph, Path
from .pathspace import CylinderFunction


class InsufficientDepthError(Exception):
    """The measure has no stored level deep enough for the request."""


class CylinderMeasure:
    """Interface: ``weight(path)`` is the mass of Z(path)."""

    def __init__(self, graph: KGraph):
        self.graph = graph

    def weight(self, path: Path):
        raise NotImplementedError

    def level_table(self, q: Degree) -> Dict[Path, object]:
        return {lam: self.weight(lam) for lam in self.graph.morphisms(q)}

    def vertex_vector(self) -> Dict[str, object]:
        g = self.graph
        return {v: self.weight(g.vertex_path(v)) for v in g.vertices}

    def total_mass(self):
        return sum(self.vertex_vector().values())

    def integrate(self, a: CylinderFunction):
        """The pairing int a dnu for a in the coefficient algebra."""
        return sum(w * self.weight(lam) for lam, w in a.weights.items())

    def check_consistency(self, q: Degree, tol=0) -> Tuple[bool, Optional[tuple]]:
        """weight(mu) = sum_{lam in s(mu) Lambda^{e_i}} weight(mu lam) for all
        mu at level q and every color; exact if tol == 0."""
        g = self.graph
        for i in range(1, g.k + 1):
            ei = g.unit(i)
            for mu in g.morphisms(q):
                total = sum(g_w for g_w in (self.weight(g.compose(mu, lam)) for lam in g.paths_from(mu.source, ei)))
                diff = self.weight(mu) - total
                bad = diff != 0 if tol == 0 else abs(diff) > tol
                if bad:
                    return False, (mu, i, diff)
        return True, None


class TableMeasure(CylinderMeasure):
    """Weights stored at explicit levels; shallower levels marginalized from
    the deepest stored level that dominates the request."""

    def __init__(
        self,
        graph: KGraph,
        levels: Dict[Degree, Dict[Path, object]],
        extender: Optional[Callable[[Degree], Dict[Path, object]]] = None,
    ):
        super().__init__(graph)
        self.levels = {q: dict(t) for q, t in levels.items()}
        self.extender = extender

    @staticmethod
    def from_box(graph: KGraph, box: Degree, table: Dict[Path, object]) -> "TableMeasure":
        return TableMeasure(graph, {box: table})

    def _dominating_level(self, d: Degree) -> Optional[Degree]:
        best = None
        for q in self.levels:
            if d <= q and (best is None or q.total() < best.total()):
                best = q
        return best

    def ensure_level(self, d: Degree) -> Degree:
        got = self._dominating_level(d)
        if got is not None:
            return got
        if self.extender is not None:
            q = self.extender_level(d)
            self.levels[q] = self.extender(q)
            return q
        raise InsufficientDepthError(f"no stored level covers {d}; have {sorted(self.levels, key=str)}")

    def extender_level(self, d: Degree) -> Degree:
        """Extenders fill diagonal levels l*(1,...,1)."""
        l = max(d.entries) if d.entries else 0
        return self.graph.ones().scale(l)

    def weight(self, path: Path):
        d = path.degree
        if d in self.levels:
            return self.levels[d].get(path, 0)
        q = self.ensure_level(d)
        table = self.levels[q]
        g = self.graph
        return sum(
            table.get(g.compose(path, rho), 0) for rho in g.paths_from(path.source, q - d)
        )


class FormulaMeasure(CylinderMeasure):
    def __init__(self, graph: KGraph, fn: Callable[[Path], object]):
        super().__init__(graph)
        self._fn = fn
        self._cache: Dict[Path, object] = {}

    def weight(self, path: Path):
        w = self._cache.get(path)
        if w is None:
            w = self._fn(path)
            self._cache[path] = w
        return w


def transfer(n: Degree, nu: CylinderMeasure) -> CylinderMeasure:
    """The transfer image R^n(nu):  (R^n nu)(Z(mu)) = nu(Z(mu(n, d(mu)))) for
    d(mu) >= n, and the marginal of that rule at shallower levels."""
    g = nu.graph
    if n.is_zero():
        return nu

    def w(path: Path):
        d = path.degree
        if d >= n:
            return nu.weight(g.segment(path, n, d))
        m = d.join(n)
        return sum(w(g.compose(path, rho)) for rho in g.paths_from(path.source, m - d))

    return FormulaMeasure(g, w)


def combine(graph: KGraph, terms: Sequence[Tuple[object, CylinderMeasure]]) -> CylinderMeasure:
    """A (signed) linear combination of measures, as a formula measure."""

    def w(path: Path):
        return sum(c * m.weight(path) for c, m in terms)

    return FormulaMeasure(graph, w)


def point_mass(graph: KGraph, prefix: Path, cycle: Path) -> CylinderMeasure:
    """The unit point mass at the ultimately periodic infinite path
    prefix . cycle . cycle . ...; cycle degree must be strictly positive."""
    if prefix.source != cycle.range or cycle.source != cycle.range:
        raise ValueError("need s(prefix) = r(cycle) = s(cycle)")
    if any(e == 0 for e in cycle.degree.entries):
        raise ValueError(f"cycle degree {cycle.degree} must be positive in every coordinate")
    initials: Dict[Degree, Path] = {}

    def initial_segment(d: Degree) -> Path:
        got = initials.get(d)
        if got is None:
            w = prefix
            while not w.degree >= d:
                w = graph.compose(w, cycle)
            got = graph.segment(w, graph.zero(), d)
            initials[d] = got
        return got

    def w_fn(path: Path):
        return 1 if path == initial_segment(path.degree) else 0

    return FormulaMeasure(graph, w_fn)


def scale_measure(nu: CylinderMeasure, c) -> CylinderMeasure:
    return FormulaMeasure(nu.graph, lambda p: c * nu.weight(p))


def random_table_measure(graph: KGraph, box: Degree, rng, exact: bool = False) -> TableMeasure:
    """A random measure supported on all of path space, stored at ``box``."""
    from fractions import Fraction

    table = {}
    for lam in graph.morphisms(box):
        table[lam] = Fraction(rng.randrange(1, 64), 64) if exact else rng.uniform(0.01, 1.0)
    return TableMeasure.from_box(graph, box, table)
