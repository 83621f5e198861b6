"""KMS, ground, and critical-temperature states on the Nica-Toeplitz algebra
of a path-space shift, evaluated on spanning-element sums.

A state is built from a measure eps with int f_beta d(eps) = 1 by pushing
eps through the weighted transfer series mu = sum_n e^{-beta r.n} R^n eps;
on a spanning element the state reads
    phi(psi_m(x) psi_n(y)*) = [m == n] e^{-beta r.m} int <y, x> d(mu).
The pairwise KMS relation phi(bc) = e^{-beta r.(m-n)} phi(cb) is an algebraic
consequence of that shape for any measure, so the checker verifies the
relation together with statehood (phi(1) = 1); an unnormalized measure fails
the latter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .degrees import Degree
from .kgraph import KGraph, Path
from .measures import (
    CylinderMeasure,
    FormulaMeasure,
    InsufficientDepthError,
    TableMeasure,
    point_mass,
    scale_measure,
)
from .nt import NTElement, nt_multiply
from .pathspace import CylinderFunction, inner_product
from .scalars import to_complex
from .thermo import (
    Dynamics,
    NonAdmissibleError,
    check_subinvariance,
    critical_temperatures,
    f_beta_vector,
    integrate_f_beta,
    recover_epsilon,
    solve_mu,
    vertex_matrices_np,
)


@dataclass
class KMSState:
    """A KMS_beta state, carried by its normalized boundary measure eps and
    the derived measure mu (stored to a box level)."""

    graph: KGraph
    dyn: Dynamics
    eps: CylinderMeasure
    mu: CylinderMeasure
    f_beta: Dict[str, float]
    _eval_cache: Dict[Tuple[Degree, Path, Path], complex] = field(default_factory=dict, repr=False)

    def eval(self, e: NTElement) -> complex:
        """Linear extension of the state formula; off-diagonal blocks
        contribute zero."""
        total = 0j
        for (m, n), block in e.blocks.items():
            if m != n:
                continue
            w = self.dyn.weight_exponent(m)
            for (lam, mu_path), c in block.coeffs.items():
                key = (m, lam, mu_path)
                val = self._eval_cache.get(key)
                if val is None:
                    ip = inner_product(
                        CylinderFunction.indicator(self.graph, mu_path, fiber=m),
                        CylinderFunction.indicator(self.graph, lam, fiber=m),
                    )
                    val = complex(self.mu.integrate(ip))
                    self._eval_cache[key] = val
                total += to_complex(c) * w * val
        return total

    def eval_one(self) -> complex:
        return self.eval(NTElement.one(self.graph))


def make_kms_state(
    graph: KGraph,
    eps_raw: CylinderMeasure,
    dyn: Dynamics,
    mu_level: Degree,
    normalize: bool = True,
) -> KMSState:
    """Normalize eps_raw so that int f_beta d(eps) = 1, then solve for mu up
    to the requested box level."""
    graph.require_valid()
    fb = f_beta_vector(graph, dyn)
    if normalize:
        mass = integrate_f_beta(graph, dyn, eps_raw)
        if mass <= 0:
            raise ValueError("eps_raw has no mass")
        eps = scale_measure(eps_raw, 1.0 / mass)
    else:
        eps = eps_raw
    mu = solve_mu(eps, dyn, mu_level)
    return KMSState(graph=graph, dyn=dyn, eps=eps, mu=mu, f_beta=fb)


# ---------------------------------------------------------------------------
# spanning-monomial samples and the KMS relation check


@dataclass(frozen=True)
class MonomialSample:
    """psi_m(chi_lam) psi_n(chi_mu)* together with its degree pair."""

    m: Degree
    lam: Path
    n: Degree
    mu: Path

    def element(self, g: KGraph) -> NTElement:
        return NTElement.term(
            g,
            1,
            self.m,
            CylinderFunction.indicator(g, self.lam, fiber=self.m),
            self.n,
            CylinderFunction.indicator(g, self.mu, fiber=self.n),
        )

    def label(self) -> str:
        lam = ".".join(self.lam.edges) or self.lam.source
        mu = ".".join(self.mu.edges) or self.mu.source
        return f"psi_{self.m}({lam})psi_{self.n}({mu})*"


def s_monomials(g: KGraph, max_degree: Degree) -> List[MonomialSample]:
    """All S_lam S_mu* with d(lam), d(mu) <= max_degree."""
    out = []
    degs = list(max_degree.box())
    for dm in degs:
        for dn in degs:
            for lam in g.morphisms(dm):
                for mu in g.morphisms(dn):
                    out.append(MonomialSample(dm, lam, dn, mu))
    return out


def deep_monomials(
    g: KGraph, max_degree: Degree, max_depth: Degree, rng, count: int
) -> List[MonomialSample]:
    """Random monomials whose indicator arguments sit deeper than their
    fibre degrees (depths up to max_depth)."""
    degs = [d for d in max_degree.box()]
    out = []
    for _ in range(count):
        m = rng.choice(degs)
        n = rng.choice(degs)
        qx = m.join(rng.choice([q for q in max_depth.box() if m <= q]))
        qy = n.join(rng.choice([q for q in max_depth.box() if n <= q]))
        lam = rng.choice(g.morphisms(qx))
        mu = rng.choice(g.morphisms(qy))
        out.append(MonomialSample(m, lam, n, mu))
    return out


def check_kms(
    state: KMSState,
    samples: Sequence[MonomialSample],
    tol: float = 1e-9,
    pair_limit: Optional[int] = None,
    rng=None,
) -> dict:
    """Verify phi(1) = 1 and the relation phi(bc) = e^{-beta r.(m-n)} phi(cb)
    for sampled pairs b, c; passes iff every pair satisfies
    |lhs - rhs| <= tol (1 + |lhs|)."""
    g = state.graph
    r = state.dyn.r
    beta = state.dyn.beta
    report = {"pairs_checked": 0, "failures": [], "passed": True}

    one_val = state.eval_one()
    norm_ok = abs(one_val - 1.0) <= tol
    report["state_normalized"] = norm_ok
    report["phi_one"] = one_val.real
    if not norm_ok:
        report["passed"] = False
        report["failures"].append({"pair": "phi(1)", "lhs": one_val.real, "rhs": 1.0})

    pairs = [(b, c) for b in samples for c in samples]
    if pair_limit is not None and len(pairs) > pair_limit:
        if rng is None:
            raise ValueError("pair_limit requires an rng for reproducible sampling")
        pairs = rng.sample(pairs, pair_limit)
    elements: Dict[MonomialSample, NTElement] = {}
    for b, c in pairs:
        eb = elements.setdefault(b, b.element(g))
        ec = elements.setdefault(c, c.element(g))
        lhs = state.eval(nt_multiply(eb, ec))
        factor = math.exp(-beta * (b.m.dot(r) - b.n.dot(r)))
        rhs = factor * state.eval(nt_multiply(ec, eb))
        report["pairs_checked"] += 1
        if abs(lhs - rhs) > tol * (1 + abs(lhs)):
            report["passed"] = False
            report["failures"].append(
                {"pair": [b.label(), c.label()], "lhs": [lhs.real, lhs.imag], "rhs": [rhs.real, rhs.imag]}
            )
            if len(report["failures"]) >= 5:
                break
    return report


def simplex_roundtrip(
    state: KMSState,
    level: Degree,
    tol: float = 1e-10,
    partner: Optional[KMSState] = None,
    t: float = 0.375,
    samples: Optional[Sequence[MonomialSample]] = None,
) -> dict:
    """The inverse map of the simplex parametrization: recovering eps from mu
    reproduces eps cylinderwise; mixing two normalized boundary measures
    evaluates affinely."""
    g = state.graph
    rec = recover_epsilon(state.mu, state.dyn)
    worst = 0.0
    for q in level.box():
        for lam in g.morphisms(q):
            worst = max(worst, abs(float(rec.weight(lam)) - float(state.eps.weight(lam))))
    out = {"recover_max_err": worst, "recover_ok": worst <= tol, "passed": worst <= tol}

    if partner is not None and samples:
        combo_eps = FormulaMeasure(
            g, lambda p: t * state.eps.weight(p) + (1 - t) * partner.eps.weight(p)
        )
        mu_level = _table_box(state.mu)
        combo = make_kms_state(g, combo_eps, state.dyn, mu_level, normalize=False)
        aff_worst = 0.0
        for s in samples:
            e = s.element(g)
            lhs = combo.eval(e)
            rhs = t * state.eval(e) + (1 - t) * partner.eval(e)
            aff_worst = max(aff_worst, abs(lhs - rhs))
        out["affine_max_err"] = aff_worst
        out["affine_ok"] = aff_worst <= 1e-9
        out["passed"] = out["passed"] and out["affine_ok"]
    return out


def _table_box(mu: CylinderMeasure) -> Degree:
    if isinstance(mu, TableMeasure):
        return max(mu.levels, key=lambda q: q.total())
    raise ValueError("expected a table-backed mu")


# ---------------------------------------------------------------------------
# ground states and the KMS_infinity limit


@dataclass
class GroundState:
    """The state reading psi_0(a) against a probability measure and killing
    every spanning element with a nonzero degree on either side."""

    graph: KGraph
    eps: CylinderMeasure

    def eval(self, e: NTElement) -> complex:
        g = self.graph
        zero = g.zero()
        total = 0j
        block = e.blocks.get((zero, zero))
        if block is None:
            return total
        for (lam, mu_path), c in block.coeffs.items():
            ip = inner_product(
                CylinderFunction.indicator(g, mu_path, fiber=zero),
                CylinderFunction.indicator(g, lam, fiber=zero),
            )
            total += to_complex(c) * complex(self.eps.integrate(ip))
        return total


def ground_state(graph: KGraph, eps: CylinderMeasure, tol: float = 1e-9) -> GroundState:
    mass = float(eps.total_mass())
    if abs(mass - 1.0) > tol:
        raise ValueError(f"ground states need a probability measure, mass = {mass}")
    return GroundState(graph=graph, eps=eps)


def ground_criterion_check(
    gs: GroundState, dyn_r: Sequence[float], samples: Sequence[MonomialSample], tol: float = 0.0
) -> dict:
    """The boundedness criterion: evaluations vanish whenever r.m > 0 or
    r.n > 0."""
    g = gs.graph
    failures = []
    for s in samples:
        if s.m.dot(dyn_r) > 0 or s.n.dot(dyn_r) > 0:
            val = gs.eval(s.element(g))
            if abs(val) > tol:
                failures.append({"sample": s.label(), "value": [val.real, val.imag]})
    return {"checked": len(samples), "failures": failures, "passed": not failures}


def kms_to_ground_sweep(
    graph: KGraph,
    eps_shape: CylinderMeasure,
    r: Tuple[float, ...],
    betas: Sequence[float],
    samples: Sequence[MonomialSample],
    mu_level: Degree,
) -> dict:
    """Evaluate the KMS states of a fixed boundary shape along a beta
    schedule and compare against the ground-state values."""
    g = graph
    mass = float(eps_shape.total_mass())
    gs = ground_state(g, scale_measure(eps_shape, 1.0 / mass))
    rows = []
    final_gap = None
    for beta in betas:
        dyn = Dynamics(r=r, beta=beta)
        st = make_kms_state(g, eps_shape, dyn, mu_level)
        gap = 0.0
        for s in samples:
            e = s.element(g)
            gap = max(gap, abs(st.eval(e) - gs.eval(e)))
        rows.append({"beta": beta, "max_gap": gap})
        final_gap = gap
    return {"schedule": rows, "final_gap": final_gap}


# ---------------------------------------------------------------------------
# the critical-temperature sequence


def preferred_dynamics(graph: KGraph, beta: float = 1.0) -> Dynamics:
    """r = (ln rho(A_1), ..., ln rho(A_k)); the common critical inverse
    temperature is then 1.  Undefined when some rho(A_i) = 1."""
    bc = critical_temperatures(graph).beta_c
    if any(b <= 0 for b in bc):
        raise NonAdmissibleError(
            f"preferred dynamics undefined: critical exponents {bc} must all be positive"
        )
    return Dynamics(r=tuple(bc), beta=beta)


def periodic_path_from(graph: KGraph, v_start: str) -> Tuple[Path, Path]:
    """An ultimately periodic path with range v_start: walk degree-(1,..,1)
    steps choosing the lexicographically first extension until a vertex
    repeats; returns (prefix, cycle)."""
    d1 = graph.ones()
    seen = {v_start: 0}
    vertices = [v_start]
    steps: List[Path] = []
    cur = v_start
    while True:
        step = graph.paths_from(cur, d1)[0]
        steps.append(step)
        cur = step.source
        if cur in seen:
            t0 = seen[cur]
            prefix = graph.vertex_path(v_start)
            for s in steps[:t0]:
                prefix = graph.compose(prefix, s)
            cycle = graph.vertex_path(cur)
            for s in steps[t0:]:
                cycle = graph.compose(cycle, s)
            return prefix, cycle
        seen[cur] = len(vertices)
        vertices.append(cur)


def max_left_perron_vertex(graph: KGraph, color: int = 1, iters: int = 500) -> str:
    """The vertex maximizing the left Perron vector of A_color."""
    a = vertex_matrices_np(graph)[color - 1]
    x = np.ones(a.shape[0])
    b = a + np.eye(a.shape[0])
    for _ in range(iters):
        x = x @ b
        x = x / np.max(x)
    return graph.vertices[int(np.argmax(x))]


def critical_sequence(
    graph: KGraph,
    vanish_degree: Degree,
    js: Sequence[int] = tuple(range(13)),
    divergence_threshold: float = 1e5,
    threshold_j: int = 10,
    vanish_target: float = 0.999,
) -> dict:
    """States at beta_j = 1 + 2^{-j} along the preferred dynamics, built on
    the point mass at an ultimately periodic path u whose range maximizes
    the left Perron vector of A_1.  Reports f_{beta_j}(u), which must grow
    without bound, and the quotient-vanishing quantity
    phi_j(sum_{lam in Lambda^n} S_lam S_lam*), which must approach 1."""
    graph.require_valid()
    base = preferred_dynamics(graph)
    v_star = max_left_perron_vertex(graph)
    prefix, cycle = periodic_path_from(graph, v_star)
    delta_u = point_mass(graph, prefix, cycle)

    vanish_elt = NTElement.zero(graph)
    for lam in graph.morphisms(vanish_degree):
        s = NTElement.generator(graph, lam)
        vanish_elt = vanish_elt + nt_multiply(s, s.adjoint())

    rows = []
    f_values = []
    for j in js:
        beta_j = 1.0 + 2.0 ** (-j)
        dyn = Dynamics(r=base.r, beta=beta_j)
        fb = f_beta_vector(graph, dyn)
        f_u = fb[v_star]
        st = make_kms_state(graph, delta_u, dyn, graph.zero())
        vanish_val = st.eval(vanish_elt).real
        rows.append({"j": j, "beta": beta_j, "f_u": f_u, "vanish_value": vanish_val})
        f_values.append(f_u)

    increasing = all(b > a for a, b in zip(f_values, f_values[1:]))
    by_j = {row["j"]: row for row in rows}
    f_at_threshold = by_j.get(threshold_j, rows[-1])["f_u"]
    vanish_final = rows[-1]["vanish_value"]
    return {
        "vertex": v_star,
        "prefix": repr(prefix),
        "cycle": repr(cycle),
        "r": list(base.r),
        "rows": rows,
        "strictly_increasing": increasing,
        "f_at_threshold": f_at_threshold,
        "divergence_ok": f_at_threshold > divergence_threshold,
        "vanish_final": vanish_final,
        "vanish_ok": vanish_final > vanish_target,
        "passed": increasing and f_at_threshold > divergence_threshold and vanish_final > vanish_target,
    }


# ---------------------------------------------------------------------------
# restriction to the k-graph Toeplitz algebra


def restrict_to_toeplitz(
    graph: KGraph,
    delta: CylinderMeasure,
    dyn: Dynamics,
    sample_degree: Degree,
    tol: float = 1e-10,
) -> dict:
    """The restriction data of the state phi_delta: the vertex vector
    eps_v = delta(Z(v)), the pairing y.eps = int f_beta d(delta) (must be 1),
    and the values on the S_lam S_mu* monomials, which depend on delta only
    through its vertex marginals."""
    g = graph
    fb = f_beta_vector(g, dyn)
    eps_vec = {v: float(delta.weight(g.vertex_path(v))) for v in g.vertices}
    y_dot_eps = sum(fb[v] * eps_vec[v] for v in g.vertices)
    if abs(y_dot_eps - 1.0) > tol:
        raise ValueError(f"delta is not normalized: int f_beta d(delta) = {y_dot_eps}")
    st = make_kms_state(g, delta, dyn, sample_degree, normalize=False)
    values = {}
    for s in s_monomials(g, sample_degree):
        values[(s.label())] = st.eval(s.element(g))
    return {
        "eps_vector": eps_vec,
        "y_dot_eps": y_dot_eps,
        "monomial_values": values,
        "state": st,
    }


# ---------------------------------------------------------------------------
# measures from vertex weight vectors


def measure_from_vertex_vector(
    graph: KGraph,
    eps_vec: Dict[str, object],
    strategy: str = "uniform",
    max_level: int = 4,
    perron_power: int = 200,
) -> TableMeasure:
    """Recursively split each weight among its degree-(1,...,1) extensions:
    uniformly, or proportionally to a (rationalized) right Perron vector of
    the full-degree vertex matrix.  The result stores the diagonal levels
    0..max_level and extends lazily; the splitting shares are exact
    rationals, so consistency and the vertex marginals are exact."""
    graph.require_valid()
    if any(Fraction(w) < 0 for w in eps_vec.values()):
        raise ValueError("vertex weights must be non-negative")
    g = graph
    d1 = g.ones()

    if strategy == "uniform":
        share_vec = {v: Fraction(1) for v in g.vertices}
    elif strategy == "perron":
        mats = vertex_matrices_np(g)
        a = np.eye(len(g.vertices))
        for m in mats:
            a = a @ m
        x = np.ones(a.shape[0])
        for _ in range(perron_power):
            x = a @ x + x
            x = x / np.max(x)
        share_vec = {v: Fraction(float(x[t])).limit_denominator(10**12) for t, v in enumerate(g.vertices)}
        if any(s <= 0 for s in share_vec.values()):
            raise ValueError("perron share vector must be strictly positive")
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    def split(weight, source: str) -> Dict[Path, object]:
        exts = g.paths_from(source, d1)
        total = sum(share_vec[p.source] for p in exts)
        return {p: weight * share_vec[p.source] / total for p in exts}

    levels: Dict[Degree, Dict[Path, object]] = {
        g.zero(): {g.vertex_path(v): Fraction(w) for v, w in eps_vec.items()}
    }
    prev = levels[g.zero()]
    for l in range(1, max_level + 1):
        table: Dict[Path, object] = {}
        for mu, w in prev.items():
            for ext, share_w in split(w, mu.source).items():
                table[g.compose(mu, ext)] = share_w
        levels[d1.scale(l)] = table
        prev = table

    store = TableMeasure(g, levels)

    def extender(q: Degree) -> Dict[Path, object]:
        deepest = max((lev for lev in store.levels if lev == d1.scale(lev[0]) or lev.is_zero()),
                      key=lambda lev: lev.total())
        cur = store.levels[deepest]
        cur_level = deepest
        while not q <= cur_level:
            nxt: Dict[Path, object] = {}
            for mu, w in cur.items():
                for ext, share_w in split(w, mu.source).items():
                    nxt[g.compose(mu, ext)] = share_w
            cur_level = cur_level + d1
            store.levels[cur_level] = nxt
            cur = nxt
        return store.levels[cur_level]

    store.extender = extender
    return store
