"""Finite k-colored graphs with factorization squares and their morphisms.

A graph is given by vertices, colored edges and, for each pair of colors
i < j, a square table sending every composable word (e, f) with e of color i
and f of color j to the unique pair (f', e') with ef = f'e'.  Words compose
left to right in range-to-source order: ``ef`` requires s(e) = r(f).

Morphisms are kept in color-ordered normal form (all color-1 edges first,
then color-2, ...).  Rewriting an out-of-order word into normal form is done
by repeated square application; every swap removes exactly one color
inversion, so the rewriting terminates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Set, Tuple

from .degrees import Degree


class KGraphError(Exception):
    """Base error for graph construction and use."""


class MalformedGraphError(KGraphError):
    """Dangling ids or structurally broken input tables."""


class AxiomError(KGraphError):
    """Input tables are well-formed but violate a k-graph axiom."""


class MorphismBudgetError(KGraphError):
    """An enumeration would exceed the configured morphism budget."""


class Edge(NamedTuple):
    eid: str
    color: int  # 1-based
    source: str
    range: str


class Path:
    """A morphism in color-ordered normal form."""

    __slots__ = ("degree", "edges", "source", "range", "_hash")

    def __init__(self, degree: Degree, edges: Tuple[str, ...], source: str, range_: str):
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "range", range_)
        object.__setattr__(self, "_hash", hash((self.edges, source)))

    def __setattr__(self, name, value):
        raise AttributeError("Path is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Path)
            and self.edges == other.edges
            and self.source == other.source
        )

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "Path"):
        return (self.edges, self.source) < (other.edges, other.source)

    def is_vertex(self) -> bool:
        return not self.edges

    def __repr__(self):
        if not self.edges:
            return f"Path<{self.source}>"
        return "Path<" + ".".join(self.edges) + ">"


@dataclass
class ValidationIssue:
    kind: str  # "malformed" or "axiom"
    message: str
    witness: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "message": self.message,
            "witness": list(self.witness) if self.witness is not None else None,
        }


@dataclass
class ValidationReport:
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.issues

    @property
    def malformed(self) -> bool:
        return any(i.kind == "malformed" for i in self.issues)

    def to_dict(self) -> dict:
        return {"valid": self.valid, "issues": [i.to_dict() for i in self.issues]}


class KGraph:
    """A finite k-graph presented by colored edges and factorization squares.

    ``squares`` maps (eid, fid) with color(e) < color(f) and s(e) = r(f) to
    the pair (f'id, e'id) with ef = f'e'.
    """

    def __init__(
        self,
        k: int,
        vertices: Sequence[str],
        edges: Sequence[Edge],
        squares: Dict[Tuple[str, str], Tuple[str, str]],
        morphism_budget: int = 10**6,
    ):
        self.k = int(k)
        self.vertices: Tuple[str, ...] = tuple(vertices)
        self.edges: Dict[str, Edge] = {e.eid: e for e in edges}
        self.squares: Dict[Tuple[str, str], Tuple[str, str]] = dict(squares)
        self.inv_squares: Dict[Tuple[str, str], Tuple[str, str]] = {}
        self.morphism_budget = morphism_budget
        self._validated: Optional[ValidationReport] = None
        self._edges_by_color: Dict[int, List[Edge]] = {}
        self._out_by_color: Dict[Tuple[str, int], List[Edge]] = {}
        self._paths_from_cache: Dict[Tuple[str, Degree], Tuple[Path, ...]] = {}
        self._morphisms_cache: Dict[Degree, Tuple[Path, ...]] = {}
        self._segment_cache: Dict[Tuple[Path, Degree, Degree], Path] = {}
        self._compose_cache: Dict[Tuple[Path, Path], Path] = {}
        self._vertex_matrices: Optional[List[List[List[int]]]] = None
        self._index()

    # ------------------------------------------------------------------
    # construction helpers

    def _index(self) -> None:
        self._edges_by_color = {c: [] for c in range(1, self.k + 1)}
        self._out_by_color = {}
        for e in self.edges.values():
            if 1 <= e.color <= self.k:
                self._edges_by_color[e.color].append(e)
                self._out_by_color.setdefault((e.range, e.color), []).append(e)
        for c in self._edges_by_color:
            self._edges_by_color[c].sort(key=lambda e: e.eid)
        for key in self._out_by_color:
            self._out_by_color[key].sort(key=lambda e: e.eid)
        self.inv_squares = {v: k for k, v in self.squares.items()}

    def zero(self) -> Degree:
        return Degree.zero(self.k)

    def unit(self, i: int) -> Degree:
        return Degree.unit(self.k, i)

    def ones(self) -> Degree:
        return Degree.ones(self.k)

    def vertex_path(self, v: str) -> Path:
        if v not in set(self.vertices):
            raise MalformedGraphError(f"unknown vertex {v!r}")
        return Path(self.zero(), (), v, v)

    def edge_path(self, eid: str) -> Path:
        e = self.edges[eid]
        return Path(self.unit(e.color), (eid,), e.source, e.range)

    # ------------------------------------------------------------------
    # validation

    def validate(self) -> ValidationReport:
        if self._validated is not None:
            return self._validated
        report = ValidationReport()
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            report.issues.append(ValidationIssue("malformed", "duplicate vertex ids"))
        if self.k < 1:
            report.issues.append(ValidationIssue("malformed", f"k must be >= 1, got {self.k}"))

        for e in self.edges.values():
            if not (1 <= e.color <= self.k):
                report.issues.append(
                    ValidationIssue("malformed", f"edge {e.eid} has color {e.color} outside 1..{self.k}", (e.eid,))
                )
            if e.source not in vset or e.range not in vset:
                report.issues.append(
                    ValidationIssue("malformed", f"edge {e.eid} has dangling endpoint", (e.eid,))
                )
        for (a, b), (c, d) in self.squares.items():
            for eid in (a, b, c, d):
                if eid not in self.edges:
                    report.issues.append(
                        ValidationIssue("malformed", f"square references unknown edge {eid}", (a, b))
                    )
        if report.issues:
            self._validated = report
            return report

        report.issues.extend(self._check_squares())
        if self.k >= 3 and not report.issues:
            report.issues.extend(self._check_hexagon())
        report.issues.extend(self._check_sources_sinks())
        self._validated = report
        return report

    def require_valid(self) -> None:
        report = self.validate()
        if not report.valid:
            kind = "malformed" if report.malformed else "axiom"
            first = report.issues[0]
            if kind == "malformed":
                raise MalformedGraphError(first.message)
            raise AxiomError(first.message)

    def _composable_pairs(self, ci: int, cj: int) -> List[Tuple[str, str]]:
        """All words (a, b) with color(a) = ci, color(b) = cj, s(a) = r(b)."""
        out = []
        for a in self._edges_by_color.get(ci, []):
            for b in self._out_by_color.get((a.source, cj), []):
                out.append((a.eid, b.eid))
        return out

    def _check_squares(self) -> List[ValidationIssue]:
        issues: List[ValidationIssue] = []
        for pair in sorted(set(self.squares) - self._all_square_domain()):
            issues.append(ValidationIssue("axiom", f"square entry {pair} has non-composable domain", pair))
        for i in range(1, self.k + 1):
            for j in range(i + 1, self.k + 1):
                pair_issues: List[ValidationIssue] = []
                domain = self._composable_pairs(i, j)
                codomain = set(self._composable_pairs(j, i))
                seen: Dict[Tuple[str, str], Tuple[str, str]] = {}
                for pair in domain:
                    if pair not in self.squares:
                        pair_issues.append(
                            ValidationIssue("axiom", f"square table missing entry for {pair}", pair)
                        )
                        continue
                    fp, ep = self.squares[pair]
                    e, f = self.edges[pair[0]], self.edges[pair[1]]
                    fe, ee = self.edges[fp], self.edges[ep]
                    if fe.color != j or ee.color != i:
                        pair_issues.append(
                            ValidationIssue("axiom", f"square {pair} -> {(fp, ep)} is not degree-preserving", pair)
                        )
                        continue
                    if not (fe.range == e.range and ee.source == f.source and fe.source == ee.range):
                        pair_issues.append(
                            ValidationIssue("axiom", f"square {pair} -> {(fp, ep)} has inconsistent boundaries", pair)
                        )
                        continue
                    if (fp, ep) not in codomain:
                        pair_issues.append(
                            ValidationIssue("axiom", f"square {pair} -> {(fp, ep)} lands on a non-composable word", pair)
                        )
                        continue
                    if (fp, ep) in seen:
                        pair_issues.append(
                            ValidationIssue(
                                "axiom",
                                f"square table not injective: {seen[(fp, ep)]} and {pair} both map to {(fp, ep)}",
                                pair,
                            )
                        )
                        continue
                    seen[(fp, ep)] = pair
                if not pair_issues and len(seen) != len(codomain):
                    missing = sorted(codomain - set(seen))[0]
                    pair_issues.append(
                        ValidationIssue("axiom", f"square table not surjective: {missing} has no preimage", missing)
                    )
                issues.extend(pair_issues)
        return issues

    def _all_square_domain(self) -> Set[Tuple[str, str]]:
        dom: Set[Tuple[str, str]] = set()
        for i in range(1, self.k + 1):
            for j in range(i + 1, self.k + 1):
                dom.update(self._composable_pairs(i, j))
        return dom

    def _check_hexagon(self) -> List[ValidationIssue]:
        """Associativity for k >= 3: rewriting a 3-colored descending word by
        its two possible first swaps must give the same normal form."""
        issues = []
        for cl in range(3, self.k + 1):
            for cj in range(2, cl):
                for ci in range(1, cj):
                    # words (a, b, c) with strictly descending colors (cl, cj, ci)
                    for a in self._edges_by_color.get(cl, []):
                        for b in self._out_by_color.get((a.source, cj), []):
                            for c in self._out_by_color.get((b.source, ci), []):
                                w = (a.eid, b.eid, c.eid)
                                first = list(w)
                                first[0], first[1] = self._swap(first[0], first[1])
                                second = list(w)
                                second[1], second[2] = self._swap(second[1], second[2])
                                if self._normalize_word(first) != self._normalize_word(second):
                                    issues.append(
                                        ValidationIssue("axiom", f"associativity fails on word {w}", w)
                                    )
        return issues

    def _check_sources_sinks(self) -> List[ValidationIssue]:
        issues = []
        for v in self.vertices:
            for c in range(1, self.k + 1):
                if not self._out_by_color.get((v, c)):
                    issues.append(
                        ValidationIssue("axiom", f"vertex {v} is a source for color {c} (v.Lambda^e{c} empty)", (v, c))
                    )
                if not any(e.source == v for e in self._edges_by_color.get(c, [])):
                    issues.append(
                        ValidationIssue("axiom", f"vertex {v} is a sink for color {c} (Lambda^e{c}.v empty)", (v, c))
                    )
        return issues

    # ------------------------------------------------------------------
    # rewriting and normal forms

    def _swap(self, a: str, b: str) -> Tuple[str, str]:
        """Rewrite the adjacent word (a, b) to the equal word with colors
        exchanged. Colors must differ."""
        ca, cb = self.edges[a].color, self.edges[b].color
        if ca < cb:
            return self.squares[(a, b)]
        if ca > cb:
            return self.inv_squares[(a, b)]
        raise KGraphError(f"cannot swap same-colored edges {a}, {b}")

    def _normalize_word(self, word: Sequence[str]) -> Tuple[str, ...]:
        w = list(word)
        changed = True
        while changed:
            changed = False
            for t in range(len(w) - 1):
                if self.edges[w[t]].color > self.edges[w[t + 1]].color:
                    w[t], w[t + 1] = self._swap(w[t], w[t + 1])
                    changed = True
        return tuple(w)

    def _word_degree(self, word: Sequence[str]) -> Degree:
        counts = [0] * self.k
        for eid in word:
            counts[self.edges[eid].color - 1] += 1
        return Degree(counts)

    def _word_path(self, word: Sequence[str], source_hint: Optional[str] = None) -> Path:
        if not word:
            if source_hint is None:
                raise KGraphError("vertex path needs a vertex")
            return self.vertex_path(source_hint)
        for t in range(len(word) - 1):
            if self.edges[word[t]].source != self.edges[word[t + 1]].range:
                raise KGraphError(f"word {word} not composable at position {t}")
        normal = self._normalize_word(word)
        return Path(
            self._word_degree(normal),
            normal,
            self.edges[normal[-1]].source,
            self.edges[normal[0]].range,
        )

    def compose(self, p: Path, q: Path) -> Path:
        if p.source != q.range:
            raise KGraphError(f"non-composable: s({p!r}) = {p.source} but r({q!r}) = {q.range}")
        if p.is_vertex():
            return q
        if q.is_vertex():
            return p
        key = (p, q)
        cached = self._compose_cache.get(key)
        if cached is None:
            cached = self._word_path(p.edges + q.edges)
            self._compose_cache[key] = cached
        return cached

    def compose_many(self, *paths: Path) -> Path:
        out = paths[0]
        for p in paths[1:]:
            out = self.compose(out, p)
        return out

    def _reorder(self, word: Sequence[str], target_colors: Sequence[int]) -> List[str]:
        """Rewrite a word so that its color sequence equals target_colors."""
        w = list(word)
        for pos in range(len(w)):
            want = target_colors[pos]
            if self.edges[w[pos]].color == want:
                continue
            j = next(
                t for t in range(pos + 1, len(w)) if self.edges[w[t]].color == want
            )
            for t in range(j, pos, -1):
                w[t - 1], w[t] = self._swap(w[t - 1], w[t])
        return w

    def factor(self, p: Path, m: Degree) -> Tuple[Path, Path]:
        """The unique factorization p = q . rest with d(q) = m."""
        if not (self.zero() <= m and m <= p.degree):
            raise KGraphError(f"cannot factor degree {p.degree} at {m}")
        rest_deg = p.degree - m
        target = []
        for deg in (m, rest_deg):
            for c in range(1, self.k + 1):
                target.extend([c] * deg[c - 1])
        w = self._reorder(p.edges, target)
        cut = m.total()
        head, tail = w[:cut], w[cut:]
        q = self._word_path(head, source_hint=p.range) if head else self.vertex_path(p.range)
        mid_range = self.edges[head[-1]].source if head else p.range
        rest = self._word_path(tail, source_hint=mid_range) if tail else self.vertex_path(p.source)
        return q, rest

    def segment(self, p: Path, m: Degree, n: Degree) -> Path:
        """The factor p(m, n) of p = p(0,m) . p(m,n) . p(n, d(p))."""
        if not (self.zero() <= m and m <= n and n <= p.degree):
            raise KGraphError(f"segment degrees out of range: 0 <= {m} <= {n} <= {p.degree} required")
        key = (p, m, n)
        cached = self._segment_cache.get(key)
        if cached is None:
            _, rest = self.factor(p, m)
            cached, _ = self.factor(rest, n - m)
            self._segment_cache[key] = cached
        return cached

    # ------------------------------------------------------------------
    # enumeration

    def vertex_matrices(self) -> List[List[List[int]]]:
        """A_i(v, w) = |v Lambda^{e_i} w| as integer matrices, with the
        commutation forced by unique factorization asserted."""
        if self._vertex_matrices is not None:
            return self._vertex_matrices
        idx = {v: t for t, v in enumerate(self.vertices)}
        nv = len(self.vertices)
        mats = []
        for c in range(1, self.k + 1):
            m = [[0] * nv for _ in range(nv)]
            for e in self._edges_by_color.get(c, []):
                m[idx[e.range]][idx[e.source]] += 1
            mats.append(m)
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                if _matmul(mats[i], mats[j]) != _matmul(mats[j], mats[i]):
                    raise AxiomError(f"vertex matrices A_{i + 1}, A_{j + 1} do not commute")
        self._vertex_matrices = mats
        return mats

    def morphism_count(self, n: Degree) -> int:
        """|Lambda^n| computed from the vertex matrices (exact integers)."""
        mats = self.vertex_matrices()
        nv = len(self.vertices)
        acc = [[1 if a == b else 0 for b in range(nv)] for a in range(nv)]
        for c in range(self.k):
            for _ in range(n[c]):
                acc = _matmul(acc, mats[c])
        return sum(sum(row) for row in acc)

    def _check_budget(self, n: Degree) -> None:
        if self.morphism_count(n) > self.morphism_budget:
            raise MorphismBudgetError(
                f"|Lambda^{n}| = {self.morphism_count(n)} exceeds the budget {self.morphism_budget}"
            )

    def paths_from(self, v: str, n: Degree) -> Tuple[Path, ...]:
        """v Lambda^n: degree-n morphisms with range v, sorted."""
        key = (v, n)
        cached = self._paths_from_cache.get(key)
        if cached is not None:
            return cached
        self._check_budget(n)
        colors: List[int] = []
        for c in range(1, self.k + 1):
            colors.extend([c] * n[c - 1])
        results: List[Path] = []

        def rec(word: List[str], cur: str, t: int) -> None:
            if t == len(colors):
                results.append(
                    Path(n, tuple(word), cur, v) if word else self.vertex_path(v)
                )
                return
            for e in self._out_by_color.get((cur, colors[t]), []):
                word.append(e.eid)
                rec(word, e.source, t + 1)
                word.pop()

        rec([], v, 0)
        results.sort()
        cached = tuple(results)
        self._paths_from_cache[key] = cached
        return cached

    def morphisms(self, n: Degree) -> Tuple[Path, ...]:
        """Lambda^n in normal form, lexicographically sorted."""
        cached = self._morphisms_cache.get(n)
        if cached is not None:
            return cached
        self._check_budget(n)
        out: List[Path] = []
        for v in self.vertices:
            out.extend(self.paths_from(v, n))
        out.sort()
        cached = tuple(out)
        self._morphisms_cache[n] = cached
        return cached

    def paths_into(self, v: str, n: Degree) -> Tuple[Path, ...]:
        """Lambda^n v: degree-n morphisms with source v, sorted."""
        key = (v, n, "into")
        cached = self._paths_from_cache.get(key)  # type: ignore[arg-type]
        if cached is None:
            cached = tuple(p for p in self.morphisms(n) if p.source == v)
            self._paths_from_cache[key] = cached  # type: ignore[index]
        return cached

    def extensions(self, p: Path, n: Degree) -> Tuple[Path, ...]:
        """All p.xi with d(xi) = n, as full paths."""
        return tuple(self.compose(p, xi) for xi in self.paths_from(p.source, n))

    # ------------------------------------------------------------------
    # minimal common extensions and coalignedness

    def lambda_min(self, mu: Path, nu: Path) -> Tuple[Tuple[Path, Path], ...]:
        """All (xi, eta) with mu.xi = nu.eta of degree d(mu) v d(nu)."""
        join = mu.degree.join(nu.degree)
        by_ext: Dict[Path, Path] = {}
        for xi in self.paths_from(mu.source, join - mu.degree):
            by_ext[self.compose(mu, xi)] = xi
        out = []
        for eta in self.paths_from(nu.source, join - nu.degree):
            w = self.compose(nu, eta)
            xi = by_ext.get(w)
            if xi is not None:
                out.append((xi, eta))
        out.sort()
        return tuple(out)

    def coextension_count(self, lam: Path, mu: Path) -> List[Tuple[Path, Path]]:
        """Pairs (eta, zeta) with eta.lam = zeta.mu for edges lam, mu of
        different colors and common source."""
        i, j = lam.degree.support()[0], mu.degree.support()[0]
        matches = []
        for eta_e in self._edges_by_color.get(j, []):
            if eta_e.source != lam.range:
                continue
            left = self.compose(self.edge_path(eta_e.eid), lam)
            for zeta_e in self._edges_by_color.get(i, []):
                if zeta_e.source != mu.range:
                    continue
                if left == self.compose(self.edge_path(zeta_e.eid), mu):
                    matches.append((self.edge_path(eta_e.eid), self.edge_path(zeta_e.eid)))
        return matches

    def is_one_coaligned(self) -> Tuple[bool, Optional[dict]]:
        """True iff every generator pair with common source has a unique
        commuting-square completion. On failure returns a witness."""
        for i in range(1, self.k + 1):
            for j in range(i + 1, self.k + 1):
                for le in self._edges_by_color.get(i, []):
                    for me in self._edges_by_color.get(j, []):
                        if le.source != me.source:
                            continue
                        lam, mu = self.edge_path(le.eid), self.edge_path(me.eid)
                        matches = self.coextension_count(lam, mu)
                        if len(matches) != 1:
                            return False, {
                                "pair": (le.eid, me.eid),
                                "colors": (i, j),
                                "solutions": len(matches),
                            }
        return True, None

    def rho_maps(self) -> Dict[str, Dict[str, Optional[str]]]:
        """For a single-vertex 2-graph, the maps rho_f(e) = (ef)(e_2, e_1+e_2)
        for f of color 2; the value table flags non-bijective maps."""
        if self.k != 2 or len(self.vertices) != 1:
            raise KGraphError("rho maps are defined for single-vertex 2-graphs only")
        e1 = self.unit(1)
        e2 = self.unit(2)
        out: Dict[str, Dict[str, Optional[str]]] = {}
        for f in self._edges_by_color[2]:
            table: Dict[str, Optional[str]] = {}
            for e in self._edges_by_color[1]:
                w = self.compose(self.edge_path(e.eid), self.edge_path(f.eid))
                table[e.eid] = self.segment(w, e2, e1 + e2).edges[0]
            out[f.eid] = table
        return out

    def rho_bijectivity(self) -> Dict[str, bool]:
        return {
            f: len(set(table.values())) == len(table)
            for f, table in self.rho_maps().items()
        }


def _matmul(a: List[List[int]], b: List[List[int]]) -> List[List[int]]:
    n, m, p = len(a), len(b), len(b[0])
    return [
        [sum(a[r][t] * b[t][c] for t in range(m)) for c in range(p)]
        for r in range(n)
    ]
