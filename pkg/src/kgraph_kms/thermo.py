"""Critical inverse temperatures, the normalization function f_beta, and the
subinvariance calculus for measures on path space.

The growth rate of degree-n preimage counts under the shifts is governed by
the vertex matrices: |sigma^{-j e_i}(z)| is the column sum (1^T A_i^j) at
r(z), so the critical inverse temperature in direction i is ln rho(A_i).

Closed resolvent forms are the primary computational path everywhere; the
truncated transfer-operator series with a certified geometric tail is kept
as an independent cross-check oracle.  Everything here is floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from .degrees import Degree
from .kgraph import KGraph, Path
from .measures import CylinderMeasure, FormulaMeasure, TableMeasure, combine, transfer
from .pathspace import CylinderFunction


class NonAdmissibleError(Exception):
    """beta r_i <= beta_{c_i} (within margin) for some direction."""


class CertificateError(Exception):
    """No usable geometric tail certificate at the requested parameters."""


ADMISSIBILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class Dynamics:
    """The one-parameter group determined by r: alpha_t = gauge(e^{itr}),
    together with an inverse temperature beta."""

    r: Tuple[float, ...]
    beta: float
    rationally_independent: bool = False  # declared, not certified

    def __post_init__(self):
        if any(x <= 0 for x in self.r):
            raise ValueError("r must be a strictly positive vector")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    def weight_exponent(self, n: Degree) -> float:
        """e^{-beta r . n}."""
        return math.exp(-self.beta * n.dot(self.r))

    def factors(self) -> Tuple[float, ...]:
        """c_i = e^{-beta r_i}."""
        return tuple(math.exp(-self.beta * ri) for ri in self.r)


@dataclass
class ThermoReport:
    beta_c: List[float]
    spectral_radii: List[float]
    gelfand: Dict[int, List[Tuple[int, float]]]  # color -> [(j, estimate)]
    admissible: Optional[bool] = None
    f_beta: Optional[Dict[str, float]] = None

    def to_dict(self) -> dict:
        return {
            "beta_c": self.beta_c,
            "spectral_radii": self.spectral_radii,
            "gelfand": {c: [[j, v] for j, v in sched] for c, sched in self.gelfand.items()},
            "admissible": self.admissible,
            "f_beta": self.f_beta,
        }


# ---------------------------------------------------------------------------
# spectral radius


def spectral_radius(a: np.ndarray, tol: float = 1e-12, max_iter: int = 200000) -> float:
    """rho(A) for a non-negative square matrix, per strongly connected
    component.  Power iteration runs on A + I so that periodic components
    (where plain iteration oscillates) still converge; rho(A+I) = rho(A)+1
    for non-negative A."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    if np.any(a < 0):
        raise ValueError("matrix must be non-negative")
    n = a.shape[0]
    ncomp, labels = connected_components(a > 0, directed=True, connection="strong")
    best = 0.0
    for comp in range(ncomp):
        idx = np.where(labels == comp)[0]
        block = a[np.ix_(idx, idx)]
        best = max(best, _power_radius(block + np.eye(len(idx)), tol, max_iter) - 1.0)
    return best


def _power_radius(b: np.ndarray, tol: float, max_iter: int) -> float:
    x = np.ones(b.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        y = b @ x
        norm = float(np.max(y))
        if norm == 0:
            return 0.0
        lam_new = float(x @ y / (x @ x))
        x = y / norm
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


def vertex_matrices_np(g: KGraph) -> List[np.ndarray]:
    return [np.array(m, dtype=float) for m in g.vertex_matrices()]


# ---------------------------------------------------------------------------
# critical temperatures


def critical_temperatures(
    g: KGraph, gelfand_schedule: Sequence[int] = (10, 100, 1000, 5000)
) -> ThermoReport:
    """beta_{c_i} = ln rho(A_i), with the direct preimage-count growth
    estimate j^{-1} ln max_v (1^T A_i^j)_v reported along a j-schedule.
    The estimates run with per-step normalization so no overflow occurs."""
    g.require_valid()
    mats = vertex_matrices_np(g)
    radii = [spectral_radius(m) for m in mats]
    beta_c = [math.log(r) if r > 0 else float("-inf") for r in radii]
    gelfand: Dict[int, List[Tuple[int, float]]] = {}
    for c, m in enumerate(mats, start=1):
        sched = []
        y = np.ones(m.shape[0])
        logsum = 0.0
        steps = sorted(set(int(j) for j in gelfand_schedule))
        j = 0
        for target in steps:
            while j < target:
                y = y @ m
                peak = float(np.max(y))
                if peak <= 0:
                    raise NonAdmissibleError(f"color {c} has a zero preimage count; graph has a source")
                logsum += math.log(peak)
                y = y / peak
                j += 1
            sched.append((target, logsum / target))
        gelfand[c] = sched
    return ThermoReport(beta_c=beta_c, spectral_radii=radii, gelfand=gelfand)


def check_admissible(g: KGraph, dyn: Dynamics) -> List[float]:
    """Margins beta r_i - beta_{c_i}; raises if any is below the floor."""
    mats = vertex_matrices_np(g)
    margins = []
    for i, m in enumerate(mats):
        bc = math.log(spectral_radius(m)) if spectral_radius(m) > 0 else float("-inf")
        margins.append(dyn.beta * dyn.r[i] - bc)
    if min(margins) < ADMISSIBILITY_MARGIN:
        raise NonAdmissibleError(
            f"dynamics not admissible: margins {margins} (need every beta*r_i > ln rho(A_i))"
        )
    return margins


# ---------------------------------------------------------------------------
# growth certificate for series tails


@dataclass
class GrowthCertificate:
    """A strictly positive vector w and per-color gammas with A_i w <= gamma_i w,
    so that (1^T prod A_i^{n_i})_v <= (1^T w / min w) * prod gamma_i^{n_i} and
    (prod A_i^{n_i} x)_v <= max(x/w) * prod gamma_i^{n_i} * w_v."""

    w: np.ndarray
    gammas: List[float]
    vertex_order: Tuple[str, ...]

    def column_constant(self) -> float:
        return float(np.sum(self.w) / np.min(self.w))


def growth_certificate(g: KGraph, power: int = 60) -> GrowthCertificate:
    mats = vertex_matrices_np(g)
    nv = len(g.vertices)
    prod = np.eye(nv)
    for m in mats:
        prod = prod @ (m + np.eye(nv))
    w = np.ones(nv)
    for _ in range(power):
        w = prod @ w
        w = w / np.max(w)
    if np.min(w) <= 0:
        raise CertificateError("certificate vector not strictly positive")
    gammas = [float(np.max((m @ w) / w)) for m in mats]
    return GrowthCertificate(w=w, gammas=gammas, vertex_order=g.vertices)


def _tail_factor(qs: Sequence[float], box: Sequence[int]) -> float:
    """sum over n outside the box of prod q_i^{n_i}, in closed form.
    Written via log1p/expm1: the direct difference of the two products
    cancels catastrophically once the tail is small."""
    full = 1.0
    log_ratio = 0.0
    for q, n in zip(qs, box):
        if q >= 1.0:
            raise CertificateError(f"geometric ratio {q} >= 1; tail not summable")
        full *= 1.0 / (1.0 - q)
        log_ratio += math.log1p(-(q ** (n + 1)))
    return full * -math.expm1(log_ratio)


def _certified_box(qs: Sequence[float], scale: float, tol: float, max_n: int = 400000) -> List[int]:
    """The smallest symmetric box with certified tail scale * tailfactor <= tol."""
    n = 1
    while n <= max_n:
        if scale * _tail_factor(qs, [n] * len(qs)) <= tol:
            return [n] * len(qs)
        n = n * 2 if n < 64 else n + max(32, n // 4)
    raise CertificateError(f"cannot reach tail tolerance {tol}; ratios {qs}")


# ---------------------------------------------------------------------------
# f_beta


def f_beta_vector(g: KGraph, dyn: Dynamics) -> Dict[str, float]:
    """f_beta as a vertex vector (it is constant on each Z(v)): the value at
    v is sum_n e^{-beta r.n} (1^T prod A_i^{n_i})_v, computed in closed form
    as 1^T prod (I - e^{-beta r_i} A_i)^{-1}."""
    check_admissible(g, dyn)
    mats = vertex_matrices_np(g)
    cs = dyn.factors()
    y = np.ones(len(g.vertices))
    for c, m in zip(cs, mats):
        y = np.linalg.solve((np.eye(m.shape[0]) - c * m).T, y)
    if np.min(y) < 1.0 - 1e-9:
        raise NonAdmissibleError(f"resolvent produced f_beta entries below 1: {y}")
    return {v: float(y[t]) for t, v in enumerate(g.vertices)}


def f_beta_function(g: KGraph, dyn: Dynamics) -> CylinderFunction:
    vec = f_beta_vector(g, dyn)
    return CylinderFunction(
        g, g.zero(), g.zero(), {g.vertex_path(v): val for v, val in vec.items()}
    )


def f_beta_series(
    g: KGraph, dyn: Dynamics, tol: float = 1e-12
) -> Tuple[Dict[str, float], float, List[int]]:
    """Truncated-series oracle for f_beta with a certified geometric tail.
    Returns (vector, tail bound, truncation box)."""
    check_admissible(g, dyn)
    cert = growth_certificate(g)
    cs = dyn.factors()
    qs = [c * gamma for c, gamma in zip(cs, cert.gammas)]
    box = _certified_box(qs, cert.column_constant(), tol)
    mats = vertex_matrices_np(g)
    nv = len(g.vertices)
    total = np.zeros(nv)

    def rec(level: int, vec: np.ndarray, weight: float):
        nonlocal total
        if level == len(mats):
            total = total + weight * vec
            return
        cur = vec
        wt = weight
        for _ in range(box[level] + 1):
            rec(level + 1, cur, wt)
            cur = cur @ mats[level]
            wt *= cs[level]

    rec(0, np.ones(nv), 1.0)
    tail = cert.column_constant() * _tail_factor(qs, box)
    return {v: float(total[t]) for t, v in enumerate(g.vertices)}, tail, box


def integrate_f_beta(g: KGraph, dyn: Dynamics, eps: CylinderMeasure) -> float:
    fb = f_beta_vector(g, dyn)
    return float(sum(fb[v] * eps.weight(g.vertex_path(v)) for v in g.vertices))


# ---------------------------------------------------------------------------
# the transfer operator at a fixed level, and mu = sum_n e^{-br.n} R^n eps


def level_transfer_matrix(g: KGraph, d: Degree, color: int) -> Tuple[np.ndarray, Tuple[Path, ...]]:
    """The matrix of R^{e_i} acting on level-d cylinder weight tables, defined
    when d has no color-i component: (R^{e_i} nu)(Z(gamma)) =
    sum over one-edge color-i extensions mu of nu(Z((gamma mu)(e_i, d+e_i)))."""
    if d[color - 1] != 0:
        raise ValueError(f"level {d} already has color-{color} depth")
    paths = g.morphisms(d)
    index = {p: t for t, p in enumerate(paths)}
    ei = g.unit(color)
    t_mat = np.zeros((len(paths), len(paths)))
    for row, gamma in enumerate(paths):
        for mu in g.paths_from(gamma.source, ei):
            shifted = g.segment(g.compose(gamma, mu), ei, d + ei)
            t_mat[row, index[shifted]] += 1.0
    return t_mat, paths


def solve_mu(
    eps: CylinderMeasure,
    dyn: Dynamics,
    target_level: Degree,
    tol: float = 1e-12,
    method: str = "resolvent",
) -> TableMeasure:
    """mu = sum_{n in N^k} e^{-beta r.n} R^n eps evaluated on every cylinder
    up to target_level (stored at that box; shallower levels marginalize).

    Every n splits uniquely as n = a + b with a = n ^ Q and b supported on
    S_a = {i : a_i = Q_i}; for fixed a the inner sum over b is a resolvent of
    the level-(Q-a) transfer matrices (``resolvent``) or a truncated
    geometric series with certified tail (``series``, the oracle)."""
    g = eps.graph
    check_admissible(g, dyn)
    q_box = target_level
    cs = dyn.factors()
    series_boxes: Optional[List[int]] = None
    tail_bound = 0.0
    if method == "series":
        cert = growth_certificate(g)
        qs = [c * gamma for c, gamma in zip(cs, cert.gammas)]
        eps_vec = np.array([float(eps.weight(g.vertex_path(v))) for v in g.vertices])
        w_ratio = float(np.max(eps_vec / cert.w)) if np.any(eps_vec) else 0.0
        scale = w_ratio * float(np.max(cert.w))
        series_boxes = _certified_box(qs, max(scale, 1e-300), tol)
        tail_bound = max(scale, 0.0) * _tail_factor(qs, series_boxes)

    table: Dict[Path, float] = {lam: 0.0 for lam in g.morphisms(q_box)}
    for a in q_box.box():
        d = q_box - a
        support = tuple(i for i in range(1, g.k + 1) if a[i - 1] == q_box[i - 1])
        paths = g.morphisms(d)
        index = {p: t for t, p in enumerate(paths)}
        vec = np.array([float(eps.weight(p)) for p in paths])
        for i in support:
            t_mat, _ = level_transfer_matrix(g, d, i)
            if method == "resolvent":
                vec = np.linalg.solve(np.eye(len(paths)) - cs[i - 1] * t_mat, vec)
            else:
                acc = np.zeros_like(vec)
                cur = vec.copy()
                wt = 1.0
                for _ in range(series_boxes[i - 1] + 1):
                    acc += wt * cur
                    cur = t_mat @ cur
                    wt *= cs[i - 1]
                vec = acc
        weight_a = dyn.weight_exponent(a)
        for lam in table:
            table[lam] += weight_a * vec[index[g.segment(lam, a, q_box)]]
    mu = TableMeasure.from_box(g, q_box, table)
    mu.series_tail_bound = tail_bound  # type: ignore[attr-defined]
    return mu


def recover_epsilon(mu: CylinderMeasure, dyn: Dynamics) -> CylinderMeasure:
    """eps = prod_i (1 - e^{-beta r_i} R^{e_i}) mu, evaluated exactly
    level-by-level (each cylinder needs finitely many mu weights)."""
    g = mu.graph
    cs = dyn.factors()
    terms = [(1.0, mu)]
    for i in range(1, g.k + 1):
        new_terms = []
        for coef, m in terms:
            new_terms.append((coef, m))
            new_terms.append((-coef * cs[i - 1], transfer(g.unit(i), m)))
        terms = new_terms
    return combine(g, terms)


def recover_epsilon_table(
    mu: CylinderMeasure, dyn: Dynamics, level: Degree, tol: float = 1e-10
) -> TableMeasure:
    """Materialize the recovered eps at a box level; negativity beyond tol
    signals that mu is not subinvariant."""
    eps = recover_epsilon(mu, dyn)
    g = mu.graph
    table = {}
    for lam in g.morphisms(level):
        w = float(eps.weight(lam))
        if w < -tol:
            raise ValueError(f"recovered measure negative at {lam!r}: {w}")
        table[lam] = w
    return TableMeasure.from_box(g, level, table)


def check_subinvariance(
    mu: CylinderMeasure, dyn: Dynamics, level: Degree, tol: float = 1e-10
) -> dict:
    """For every K subseteq {1..k}, evaluate prod_{i in K}(1 - e^{-beta r_i}
    R^{e_i}) mu on every cylinder at ``level``; pass iff all values >= -tol."""
    g = mu.graph
    cs = dyn.factors()
    colors = list(range(1, g.k + 1))
    results = {}
    passed = True
    for mask in range(1 << len(colors)):
        subset = tuple(colors[t] for t in range(len(colors)) if mask >> t & 1)
        terms = [(1.0, mu)]
        for i in subset:
            terms = [t for coef, m in terms for t in ((coef, m), (-coef * cs[i - 1], transfer(g.unit(i), m)))]
        measure = combine(g, terms)
        worst = None
        for lam in g.morphisms(level):
            val = float(measure.weight(lam))
            if worst is None or val < worst[1]:
                worst = (repr(lam), val)
        ok = worst is None or worst[1] >= -tol
        passed = passed and ok
        results[",".join(map(str, subset)) or "empty"] = {
            "min_value": worst[1] if worst else 0.0,
            "witness": worst[0] if worst else None,
            "passed": ok,
        }
    return {"passed": passed, "level": str(level), "tol": tol, "subsets": results}
