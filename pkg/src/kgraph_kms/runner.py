"""Command engine shared by the HTTP service and the CLI.

Each command parses the graph, runs its suite, and returns a Report whose
checks each carry name, parameters, measured value, tolerance and pass
flag.  Exit-code mapping (used by the CLI): 0 all checks pass, 1 a check or
a graph axiom failed, 2 the input could not be used at all.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

from .degrees import Degree
from .graph_text import GraphSyntaxError, parse_kgraph_text
from .kgraph import KGraph, MalformedGraphError
from .kms import (
    check_kms,
    critical_sequence,
    deep_monomials,
    ground_criterion_check,
    ground_state,
    kms_to_ground_sweep,
    make_kms_state,
    measure_from_vertex_vector,
    preferred_dynamics,
    restrict_to_toeplitz,
    s_monomials,
    simplex_roundtrip,
)
from .measures import random_table_measure, scale_measure
from .nt import NTElement, cross_product, nt_multiply
from .pathspace import (
    CylinderFunction,
    ensure_one_coaligned,
    flip,
    inner_product,
    left_act,
    multiply as ps_multiply,
    pullback,
    right_act,
    shifted_frame,
    standard_frame,
    tensor_sum,
)
from .reports import Report
from .representations import (
    check_frame_dichotomy,
    check_nica_covariance,
    element_expr,
    elements_equal_via_fock,
    kernel_generator,
    operators_equal_on_window,
    path_apply_element,
    path_operators_equal,
)
from .thermo import (
    Dynamics,
    NonAdmissibleError,
    check_admissible,
    check_subinvariance,
    critical_temperatures,
    f_beta_series,
    f_beta_vector,
    integrate_f_beta,
    recover_epsilon,
)

COMMANDS = (
    "validate",
    "coaligned",
    "spectra",
    "fbeta",
    "kms",
    "ground",
    "critical",
    "verify",
    "restrict",
    "measure",
)


class InputError(Exception):
    """Unusable input: syntax/config problems (CLI exit code 2)."""

    def __init__(self, message: str, kind: str = "config"):
        self.kind = kind
        super().__init__(message)


class AxiomFailure(Exception):
    """The graph fails a k-graph axiom (CLI exit code 1)."""


@dataclass
class JobConfig:
    command: str
    graph_text: str
    beta: Optional[float] = None
    r: Optional[Union[str, List[float]]] = None
    levels: int = 2
    window: int = 1
    depth: int = 2
    tol: float = 1e-9
    samples: int = 40
    seed: int = 0

    def public(self) -> dict:
        return {
            "command": self.command,
            "beta": self.beta,
            "r": self.r,
            "levels": self.levels,
            "window": self.window,
            "depth": self.depth,
            "tol": self.tol,
            "samples": self.samples,
            "seed": self.seed,
        }

    def validated(self) -> "JobConfig":
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}; have {COMMANDS}")
        for name in ("levels", "window", "depth", "samples"):
            if getattr(self, name) < 0:
                raise InputError(f"{name} must be non-negative")
        if self.tol is not None and self.tol <= 0:
            raise InputError("tol must be positive")
        if self.beta is not None and self.beta <= 0:
            raise InputError("beta must be positive")
        if isinstance(self.r, list) and any(x <= 0 for x in self.r):
            raise InputError("r must be strictly positive")
        return self


def run(cfg: JobConfig) -> Report:
    cfg = cfg.validated()
    try:
        g = parse_kgraph_text(cfg.graph_text)
    except GraphSyntaxError as ex:
        raise InputError(str(ex), kind="syntax") from ex
    report = Report(command=cfg.command, config=cfg.public(), graph_summary=_summary(g))

    if cfg.command == "validate":
        _cmd_validate(g, cfg, report)
        return report

    vrep = g.validate()
    if vrep.malformed:
        raise InputError(vrep.issues[0].message, kind="syntax")
    if not vrep.valid:
        raise AxiomFailure(vrep.issues[0].message)

    rng = random.Random(cfg.seed)
    handler = {
        "coaligned": _cmd_coaligned,
        "spectra": _cmd_spectra,
        "fbeta": _cmd_fbeta,
        "kms": _cmd_kms,
        "ground": _cmd_ground,
        "critical": _cmd_critical,
        "verify": _cmd_verify,
        "restrict": _cmd_restrict,
        "measure": _cmd_measure,
    }[cfg.command]
    handler(g, cfg, rng, report)
    return report


def _summary(g: KGraph) -> dict:
    return {"k": g.k, "vertices": len(g.vertices), "edges": len(g.edges)}


def _resolve_dynamics(g: KGraph, cfg: JobConfig, default_beta: Optional[float] = None) -> Dynamics:
    beta = cfg.beta if cfg.beta is not None else default_beta
    if beta is None:
        raise InputError(f"command {cfg.command!r} needs --beta")
    if cfg.r is None:
        r = (1.0,) * g.k
    elif cfg.r == "preferred":
        try:
            r = preferred_dynamics(g).r
        except NonAdmissibleError as ex:
            raise InputError(str(ex)) from ex
    elif isinstance(cfg.r, list):
        if len(cfg.r) != g.k:
            raise InputError(f"r has {len(cfg.r)} entries but the graph has k = {g.k}")
        r = tuple(float(x) for x in cfg.r)
    else:
        raise InputError(f"cannot interpret r = {cfg.r!r}")
    return Dynamics(r=r, beta=float(beta))


# ---------------------------------------------------------------------------
# commands


def _cmd_validate(g: KGraph, cfg: JobConfig, report: Report) -> None:
    vrep = g.validate()
    malformed = [i.to_dict() for i in vrep.issues if i.kind == "malformed"]
    axioms = [i.to_dict() for i in vrep.issues if i.kind == "axiom"]
    report.add("tables_well_formed", not malformed, value=malformed)
    report.add("kgraph_axioms", not axioms and not malformed, value=axioms)
    if vrep.valid:
        coaligned, witness = g.is_one_coaligned()
        report.add("one_coaligned_info", True, value={"coaligned": coaligned, "witness": witness})


def _cmd_coaligned(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    ok, witness = g.is_one_coaligned()
    report.add("one_coaligned", ok, value=witness)
    if g.k == 2 and len(g.vertices) == 1:
        bij = g.rho_bijectivity()
        report.add(
            "completion_maps_agree",
            all(bij.values()) == ok,
            value={"tables": g.rho_maps(), "bijective": bij},
        )


def _cmd_spectra(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    rep = critical_temperatures(g)
    gel_tol = 5e-3
    for c in range(1, g.k + 1):
        sched = rep.gelfand[c]
        final_j, final_est = sched[-1]
        report.add(
            f"critical_exponent_color{c}",
            abs(final_est - rep.beta_c[c - 1]) <= gel_tol,
            value={
                "beta_c": rep.beta_c[c - 1],
                "spectral_radius": rep.spectral_radii[c - 1],
                "growth_estimate": {"j": final_j, "value": final_est},
                "schedule": sched,
            },
            tolerance=gel_tol,
        )


def _cmd_fbeta(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    dyn = _resolve_dynamics(g, cfg)
    try:
        margins = check_admissible(g, dyn)
    except NonAdmissibleError as ex:
        report.add("admissible", False, value=str(ex))
        return
    report.add("admissible", True, value=margins)
    closed = f_beta_vector(g, dyn)
    series, tail, box = f_beta_series(g, dyn, tol=1e-12)
    gap = max(abs(closed[v] - series[v]) for v in g.vertices)
    report.add(
        "resolvent_vs_series",
        gap <= 1e-10 + tail,
        value={"closed": closed, "series": series, "max_gap": gap, "certified_tail": tail, "box": box},
        tolerance=1e-10,
    )
    report.add("f_beta_at_least_one", min(closed.values()) >= 1.0 - 1e-12, value=closed)


def _seed_measure(g: KGraph, cfg: JobConfig, rng, box: Degree):
    return random_table_measure(g, box, rng)


def _cmd_kms(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    dyn = _resolve_dynamics(g, cfg)
    box = g.ones().scale(max(1, cfg.levels))
    try:
        check_admissible(g, dyn)
    except NonAdmissibleError as ex:
        report.add("admissible", False, value=str(ex))
        return
    report.add("admissible", True)
    state = make_kms_state(g, _seed_measure(g, cfg, rng, box), dyn, box)
    partner = make_kms_state(g, _seed_measure(g, cfg, rng, box), dyn, box)

    mono = s_monomials(g, g.ones())
    pair_budget = max(16, cfg.samples)
    kms_rep = check_kms(state, mono, tol=cfg.tol, pair_limit=pair_budget * pair_budget, rng=rng)
    report.add(
        "kms_relation",
        kms_rep["passed"],
        value={k: kms_rep[k] for k in ("pairs_checked", "failures", "phi_one", "state_normalized")},
        tolerance=cfg.tol,
    )
    rt = simplex_roundtrip(state, box, tol=1e-10, partner=partner, samples=mono[: cfg.samples])
    report.add("simplex_roundtrip", rt["recover_ok"], value=rt["recover_max_err"], tolerance=1e-10)
    report.add("simplex_affine", rt.get("affine_ok", True), value=rt.get("affine_max_err"), tolerance=1e-9)
    sub = check_subinvariance(state.mu, dyn, g.ones(), tol=1e-10)
    report.add("subinvariance_all_subsets", sub["passed"], value=sub["subsets"], tolerance=1e-10)


def _cmd_ground(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    box = g.ones().scale(max(1, cfg.levels))
    eps_shape = _seed_measure(g, cfg, rng, box)
    gs = ground_state(g, scale_measure(eps_shape, 1.0 / float(eps_shape.total_mass())))
    r = (1.0,) * g.k if cfg.r is None or cfg.r == "preferred" else tuple(cfg.r)
    mono = s_monomials(g, g.ones())
    deep = deep_monomials(g, g.ones(), box, rng, cfg.samples)
    crit = ground_criterion_check(gs, r, mono + deep)
    report.add("ground_vanishing", crit["passed"], value={"checked": crit["checked"], "failures": crit["failures"]})
    sweep = kms_to_ground_sweep(g, eps_shape, r, [5.0, 10.0, 20.0, 40.0], mono[: cfg.samples], box)
    report.add("kms_infinity_limit", sweep["final_gap"] <= 1e-6, value=sweep, tolerance=1e-6)


def _cmd_critical(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    try:
        cs = critical_sequence(g, _vanish_degree(g))
    except NonAdmissibleError as ex:
        raise InputError(str(ex)) from ex
    report.add("f_strictly_increasing", cs["strictly_increasing"], value=[r["f_u"] for r in cs["rows"]])
    report.add("f_diverges", cs["divergence_ok"], value=cs["f_at_threshold"], tolerance=1e5)
    report.add("quotient_vanishing", cs["vanish_ok"], value=cs["vanish_final"], tolerance=0.999)
    report.add(
        "sequence_data",
        True,
        value={"rows": cs["rows"], "vertex": cs["vertex"], "prefix": cs["prefix"], "cycle": cs["cycle"], "r": cs["r"]},
    )


def _vanish_degree(g: KGraph) -> Degree:
    return g.unit(1)


def _verify_degrees(g: KGraph):
    m = g.unit(1)
    n = g.unit(2) if g.k >= 2 else g.zero()
    return m, n


def _random_exact_cf(g: KGraph, fiber: Degree, depth: Degree, rng) -> CylinderFunction:
    ws = {p: Fraction(rng.randrange(-6, 7), 4) for p in g.morphisms(depth)}
    return CylinderFunction(g, fiber, depth, ws)


def _cmd_verify(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    ensure_one_coaligned(g)
    m, n = _verify_degrees(g)
    depth_pad = g.ones()

    frame_m = standard_frame(g, m)
    basis = [CylinderFunction.indicator(g, lam, fiber=m) for lam in g.morphisms(m + depth_pad)]
    report.add("parseval_standard", all(frame_m.reconstructs(x) for x in basis), params={"m": m})

    if g.k >= 2:
        sh = shifted_frame(g, m, n)
        report.add("parseval_shifted", all(sh.reconstructs(x) for x in basis), params={"m": m, "n": n})
        report.add("flip_formula", _flip_formula_ok(g, m, n), params={"m": m, "n": n})
        report.add("helpformula", _helpformula_ok(g, m, n, rng), params={"m": m, "n": n})

    x = _random_exact_cf(g, m, m + depth_pad, rng)
    y = _random_exact_cf(g, n, n + depth_pad, rng)
    lhs = [(1, [("a", y), ("c", x)])]
    eq, witness = operators_equal_on_window(lhs, element_expr(cross_product(y, x)), graph=g)
    report.add("formula_fock_window", eq, value=witness, params={"m": m, "n": n})

    eq, witness = check_nica_covariance(g, m, n)
    report.add("nica_covariance", eq, value=witness, params={"m": m, "p": n})

    eq, witness = check_frame_dichotomy(g, m, m.join(n) + depth_pad)
    report.add("projection_dichotomy", eq, value=witness, params={"n": m})

    report.add("tck_relations", _tck_ok(g), params={"max_degree": g.ones()})
    report.add("tck4_strict", _tck4_strict_ok(g), params={"n": g.ones()})
    report.add("ck_pathspace", _ck_ok(g), params={"n": g.ones()})
    report.add("kernel_vanishes_in_quotient", _kernel_zero_ok(g, rng), params={"n": g.ones()})


def _flip_formula_ok(g: KGraph, m: Degree, n: Degree) -> bool:
    for xi in g.morphisms(m):
        for eta in g.morphisms(n):
            x = pullback(CylinderFunction.indicator(g, xi), n).in_fiber(m)
            y = CylinderFunction.indicator(g, eta, fiber=n)
            if x.is_zero_function() or y.is_zero_function():
                continue
            got = flip(x, y)
            want_x = pullback(CylinderFunction.indicator(g, eta), m).in_fiber(n)
            want_y = CylinderFunction.indicator(g, xi, fiber=m)
            lhs = tensor_sum(got) if got else None
            rhs = ps_multiply(want_x, want_y)
            if lhs is None:
                if not rhs.is_zero_function():
                    return False
                continue
            if not (lhs == rhs):
                return False
    return True


def _helpformula_ok(g: KGraph, m: Degree, n: Degree, rng) -> bool:
    """sigma_{m,n}(x (x) y) expanded over the common depth-(m+n) indicator
    partition: x y = sum_{i,j} (tau_j o sigma^m) tau_i . <<x, tau_i o sigma^n> tau_j, y>."""
    x = _random_exact_cf(g, m, m + n, rng)
    y = _random_exact_cf(g, n, m + n, rng)
    lhs = ps_multiply(x, y)
    taus = [CylinderFunction.indicator(g, lam) for lam in g.morphisms(m + n)]
    rhs = None
    for tau_i in taus:
        xi_inner = inner_product(x, pullback(tau_i, n).in_fiber(m))
        for tau_j in taus:
            head = ps_multiply(pullback(tau_j, m).in_fiber(n), tau_i.in_fiber(m))
            coef = inner_product(left_act(xi_inner, tau_j.in_fiber(n)), y)
            term = right_act(head, coef)
            rhs = term if rhs is None else rhs + term
    return rhs is not None and lhs == rhs


def _tck_ok(g: KGraph) -> bool:
    degs = list(g.ones().box())
    paths = [p for d in degs for p in g.morphisms(d)]
    gen = {p: NTElement.generator(g, p) for p in paths}
    # TCK1
    for v in g.vertices:
        for w in g.vertices:
            pv, pw = g.vertex_path(v), g.vertex_path(w)
            want = gen[pv] if v == w else NTElement.zero(g)
            if nt_multiply(gen[pv], gen[pw]) != want:
                return False
    for lam in paths:
        # TCK3
        sv = NTElement.generator(g, g.vertex_path(lam.source))
        if nt_multiply(gen[lam].adjoint(), gen[lam]) != sv:
            return False
        # TCK2
        for mu in paths:
            if lam.source == mu.range:
                if nt_multiply(gen[lam], gen[mu]) != NTElement.generator(g, g.compose(lam, mu)):
                    return False
    # TCK5
    for mu in paths:
        for nu in paths:
            lhs = nt_multiply(gen[mu].adjoint(), gen[nu])
            rhs = NTElement.zero(g)
            for xi, eta in g.lambda_min(mu, nu):
                rhs = rhs + nt_multiply(NTElement.generator(g, xi), NTElement.generator(g, eta).adjoint())
            if lhs != rhs:
                return False
    return True


def _projection_sum(g: KGraph, v: str, n: Degree) -> NTElement:
    out = NTElement.zero(g)
    for lam in g.paths_from(v, n):
        s = NTElement.generator(g, lam)
        out = out + nt_multiply(s, s.adjoint())
    return out


def _tck4_strict_ok(g: KGraph) -> bool:
    n = g.ones()
    for v in g.vertices:
        sv = NTElement.generator(g, g.vertex_path(v))
        eq, _ = elements_equal_via_fock(sv, _projection_sum(g, v, n))
        if eq:
            return False  # must be a strict inequality at the Toeplitz level
    return True


def _ck_ok(g: KGraph) -> bool:
    n = g.ones()
    for v in g.vertices:
        sv = NTElement.generator(g, g.vertex_path(v))
        eq, _ = path_operators_equal(
            element_expr(sv), element_expr(_projection_sum(g, v, n)), g, n
        )
        if not eq:
            return False
    return True


def _kernel_zero_ok(g: KGraph, rng) -> bool:
    for nd in (g.unit(1), g.ones()):
        a = _random_exact_cf(g, g.zero(), g.unit(1), rng)
        elt = kernel_generator(g, a, nd)
        for lam in g.morphisms(nd):
            out = path_apply_element(elt, CylinderFunction.indicator(g, lam, fiber=g.zero()))
            if not out.is_zero_function():
                return False
    return True


def _cmd_restrict(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    dyn = _resolve_dynamics(g, cfg)
    try:
        check_admissible(g, dyn)
    except NonAdmissibleError as ex:
        report.add("admissible", False, value=str(ex))
        return
    box = g.ones().scale(max(2, cfg.levels))
    raw = _seed_measure(g, cfg, rng, box)
    delta1 = scale_measure(raw, 1.0 / integrate_f_beta(g, dyn, raw))
    r1 = restrict_to_toeplitz(g, delta1, dyn, g.ones())
    report.add("pairing_is_one", abs(r1["y_dot_eps"] - 1.0) <= 1e-10, value=r1["y_dot_eps"], tolerance=1e-10)

    # same vertex marginals, different deep weights
    delta2 = measure_from_vertex_vector(
        g, {v: r1["eps_vector"][v] for v in g.vertices}, "uniform", max_level=max(2, cfg.levels)
    )
    r2 = restrict_to_toeplitz(g, delta2, dyn, g.ones())
    diff_restriction = max(
        abs(r1["monomial_values"][k] - r2["monomial_values"][k]) for k in r1["monomial_values"]
    )
    report.add("equal_vertex_marginals_equal_restriction", diff_restriction <= 1e-9, value=diff_restriction, tolerance=1e-9)

    deep_gap = 0.0
    for lam in g.morphisms(box):
        s = _monomial_deep(g, lam, g.ones())
        deep_gap = max(deep_gap, abs(r1["state"].eval(s) - r2["state"].eval(s)))
    report.add("deep_elements_separate", deep_gap > 1e-8, value=deep_gap, tolerance=1e-8)


def _monomial_deep(g: KGraph, lam, m: Degree) -> NTElement:
    cf = CylinderFunction.indicator(g, lam, fiber=m)
    return NTElement.term(g, 1, m, cf, m, cf)


def _cmd_measure(g: KGraph, cfg: JobConfig, rng, report: Report) -> None:
    eps_vec = {v: Fraction(rng.randrange(1, 16), 8) for v in g.vertices}
    max_level = max(4, cfg.levels)
    for strategy in ("uniform", "perron"):
        dm = measure_from_vertex_vector(g, eps_vec, strategy, max_level=max_level)
        ok_marginal = all(dm.weight(g.vertex_path(v)) == eps_vec[v] for v in g.vertices)
        consistent = True
        witness = None
        for l in range(0, max_level):
            ok, wit = dm.check_consistency(g.ones().scale(l))
            if not ok:
                consistent = False
                witness = repr(wit)
                break
        report.add(
            f"measure_{strategy}",
            ok_marginal and consistent,
            value={"vertex_marginals_exact": ok_marginal, "consistent": consistent, "witness": witness},
            params={"levels": max_level, "eps": {v: str(w) for v, w in eps_vec.items()}},
        )
