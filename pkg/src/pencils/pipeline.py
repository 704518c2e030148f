"""End-to-end construction at one scale: net, graph, max flow, current,
pencil, and every verification, collected into a JSON-ready report."""
from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib.resources import files
from typing import Optional

import numpy as np

from . import io
from .current import (
    boundary,
    boundary_variation,
    build_current,
    density_check,
    lemma1_check,
    normalize,
    support_check,
)
from .exceptions import InvalidInputError, RetainedMassError
from .flow import flow_across, flow_norm, max_flow, min_cut, separated_min_cut, validate_flow
from .generators import generate, parse_generator
from .netgraph import boundary_vertices, build_graph, check_cut_function, cut_function
from .pencil import (
    acyclic_reduce,
    decompose,
    good_half,
    is_arc,
    markov_c0,
    reconstruct,
    retained_fraction,
    verify_pc_inequality,
)
from .poincare import cut_pi_bridge, pi_survey, pointwise_pi_check
from .space import Space, build_net, random_lipschitz

SCHEMA_VERSION = 1
SECTIONS_NEEDING_FLOW = ("current", "density", "support", "lemma1", "pencil",
                         "pc_inequality", "cut_function", "poincare")


@dataclass
class PipelineConfig:
    space: str
    source: int
    target: int
    scale: int
    c0: float = 4.0
    lam: float = 1.0
    lip_multiplier: float = 2.0
    seed: int = 0
    half_multiplier: float = 2.0
    num_g: int = 20
    num_lipschitz: int = 100
    num_balls: int = 20
    separation_margin: float = 2.0

    def echo(self) -> dict:
        return asdict(self)


def load_space_spec(spec: str) -> Space:
    """``gen:name:p1,p2,...`` for a built-in generator, otherwise a JSON file path."""
    if spec.startswith("gen:"):
        name, params = parse_generator(spec)
        return generate(name, *params)
    if not os.path.exists(spec):
        raise InvalidInputError(f"no such space file: {spec}")
    return io.load_space(spec)


@dataclass
class Report:
    data: dict
    timings: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.data["status"] == "ok"

    def to_dict(self, include_timings: bool = False) -> dict:
        if not include_timings:
            return self.data
        out = dict(self.data)
        out["timings"] = {k: io.real(v, 4) for k, v in self.timings.items()}
        return out


class _Clock:
    def __init__(self):
        self.times = {}
        self._last = time.perf_counter()

    def lap(self, name):
        now = time.perf_counter()
        self.times[name] = now - self._last
        self._last = now


def run_pipeline(config: PipelineConfig, space: Optional[Space] = None) -> Report:
    """Build the flow current and pencil at scale ``r_n = 2^-n d(s, t)`` and verify them.

    The current and pencil are normalised by the flow norm so that the boundary
    is exactly ``delta_t - delta_s``. A disconnected net graph yields a report
    with status ``"disconnected"`` carrying the zero-capacity cut.
    """
    clock = _Clock()
    if space is None:
        space = load_space_spec(config.space)
    s, t = space.check_id(config.source), space.check_id(config.target)
    if s == t:
        raise InvalidInputError("source and target must differ")
    if config.scale < 1:
        raise InvalidInputError("scale exponent must be >= 1 so that r_n < d(s, t)")
    rng = np.random.default_rng(config.seed)
    dst = float(space.dist[s, t])
    r_n = dst * 2.0 ** (-config.scale)
    domain_radius = config.c0 * dst
    lip_radius = config.lip_multiplier * space.resolution
    R = io.real
    data = {
        "schema": SCHEMA_VERSION,
        "config": config.echo(),
        "space": {
            "points": len(space),
            "metric": space.metric,
            "total_mass": R(space.total_mass),
            "resolution": R(space.resolution),
        },
        "scale": {
            "n": config.scale,
            "r_n": R(r_n),
            "d_st": R(dst),
            "domain_radius": R(domain_radius),
            "lip_radius": R(lip_radius),
        },
    }
    checks = {}
    artifacts = {"space": space}

    net = build_net(space, s, t, r_n, domain_radius)
    graph = build_graph(net, space)
    artifacts["graph"] = graph
    data["graph"] = {"vertices": len(graph.vertices), "edges": len(graph.edges),
                     "max_degree": graph.max_degree}
    clock.lap("graph")

    flow = max_flow(graph)
    side, cap = min_cut(graph, flow)
    norm = flow_norm(flow)
    vf = validate_flow(flow)
    artifacts["flow"] = flow
    checks["flow_axioms"] = vf.ok
    checks["duality"] = norm == cap and flow_across(flow, side) == norm
    data["flow"] = {"norm": io.rational(norm), "norm_float": R(norm),
                    "valid": vf.ok, "violation": vf.detail or None}
    data["min_cut"] = {
        "capacity": io.rational(cap),
        "capacity_float": R(cap),
        "side": sorted(side),
        "boundary_vertices": sorted(boundary_vertices(graph, side)),
    }
    clock.lap("flow")

    if norm == 0:
        data["status"] = "disconnected"
        data["certificate"] = {
            "reason": "sink unreachable from source in the net graph; zero-capacity cut",
            "cut_side": sorted(side),
            "cut_capacity": io.rational(cap),
        }
        checks["connected"] = False
        reason = "zero flow: no current or pencil exists at this scale"
        for key in SECTIONS_NEEDING_FLOW:
            data[key] = {"skipped": reason}
        data["checks"] = checks
        return Report(data, clock.times, artifacts)

    raw = build_current(flow, space)
    current = normalize(raw, norm)
    artifacts["current"] = current
    atoms = boundary(current)
    checks["boundary_exact"] = atoms == {s: Fraction(-1), t: Fraction(1)}
    checks["boundary_variation"] = boundary_variation(boundary(raw)) == 2 * norm
    dens = density_check(current, space, config.c0)
    supp = support_check(current, space, config.c0)
    checks["support"] = supp.ok
    data["current"] = {
        "segments": len(current.segments),
        "boundary": io.boundary_to_dict(atoms),
        "total_mass": R(current.mass),
        "total_mass_over_d_st": R(current.mass / dst),
        "unnormalized_mass": R(raw.mass),
    }
    data["density"] = {
        "max_ratio": R(dens.max_ratio),
        "argmax": dens.argmax,
        "flagged": list(dens.flagged),
    }
    data["support"] = {"ok": supp.ok, "radius": R(supp.radius), "max_excess": R(supp.max_excess)}
    clock.lap("current")

    seg_radius = max(max(sg.length for sg in current.segments), lip_radius)
    worst, passes = 0.0, 0
    for _ in range(config.num_lipschitz):
        u, _ = random_lipschitz(space, rng)
        chk = lemma1_check(current, space, u, seg_radius)
        passes += chk.passed
        if chk.rhs > 0:
            worst = max(worst, chk.lhs / chk.rhs)
    checks["lemma1"] = passes == config.num_lipschitz
    data["lemma1"] = {"tests": config.num_lipschitz, "passed": passes,
                      "lip_radius": R(seg_radius), "max_lhs_over_rhs": R(worst)}
    clock.lap("lemma1")

    reduced, cycles = acyclic_reduce(flow)
    pencil = decompose(reduced, space)
    artifacts["pencil_raw"] = pencil
    original = {e: v for e, v in flow.values.items() if v != 0}
    checks["reconstruction"] = reconstruct(pencil.curves, cycles) == original
    checks["arcs"] = all(is_arc(c, s, t) for c in pencil.curves)
    checks["pencil_mass"] = pencil.total_weight == norm
    normalized = pencil.normalize()
    half_c0 = markov_c0(normalized, space, config.half_multiplier)
    kept = retained_fraction(normalized, space, half_c0)
    try:
        final = good_half(normalized, space, half_c0)
        checks["good_half"] = True
    except RetainedMassError:
        final = normalized
        checks["good_half"] = False
    artifacts["pencil"] = final
    cycle_mass = sum(float(c.weight) * sum(
        space.dist[a, b] for a, b in zip(c.path, c.path[1:] + c.path[:1])) for c in cycles)
    data["pencil"] = {
        "cycles": len(cycles),
        "cycle_mass": R(cycle_mass),
        "curves": len(pencil.curves),
        "unnormalized_weight": io.rational(pencil.total_weight),
        "mean_length": R(normalized.mean_length),
        "max_length": R(normalized.max_length),
        "good_half": {
            "multiplier": config.half_multiplier,
            "length_cap_over_d_st": R(half_c0),
            "retained_fraction": R(kept),
            "curves": len(final.curves),
            "max_length_over_d_st": R(final.max_length / dst),
        },
    }
    clock.lap("pencil")

    ratios = []
    for _ in range(config.num_g):
        g = rng.uniform(0.0, 1.0, size=len(space))
        ratios.append(verify_pc_inequality(final, space, g, config.c0).ratio)
    ones = verify_pc_inequality(final, space, np.ones(len(space)), config.c0)
    data["pc_inequality"] = {
        "num_g": config.num_g,
        "max_ratio": R(max(ratios)) if ratios else None,
        "mean_ratio": R(float(np.mean(ratios))) if ratios else None,
        "unit_g": {"lhs": R(ones.lhs), "rhs": R(ones.rhs), "ratio": R(ones.ratio)},
    }
    clock.lap("pc")

    cut_report = check_cut_function(graph, side, space, lip_radius)
    checks["cut_function"] = (cut_report.in_unit_interval and cut_report.dichotomy_ok
                              and cut_report.localized_ok)
    data["cut_function"] = {"min_cut": _cut_section(cut_report)}
    sep = separated_min_cut(graph, space, config.separation_margin)
    if sep is None:
        data["cut_function"]["separated_cut"] = {
            "skipped": "no cut keeps its edges away from both terminals at this scale"}
    else:
        sep_side, sep_cap = sep
        sep_report = check_cut_function(graph, sep_side, space, lip_radius)
        checks["separated_cut_function"] = (sep_report.endpoints_exact and sep_report.in_unit_interval
                                            and sep_report.dichotomy_ok and sep_report.localized_ok)
        sec = _cut_section(sep_report)
        sec["capacity"] = io.rational(sep_cap)
        sec["capacity_float"] = R(sep_cap)
        sec["margin"] = config.separation_margin
        data["cut_function"]["separated_cut"] = sec
    clock.lap("cut_function")

    data["poincare"] = _poincare_section(space, graph, side, sep, s, t, config, lip_radius, rng)
    clock.lap("poincare")

    data["checks"] = checks
    data["status"] = "ok" if all(checks.values()) else "verification_failed"
    return Report(data, clock.times, artifacts)


def _cut_section(rep) -> dict:
    R = io.real
    return {
        "u_source": R(rep.u_source),
        "u_sink": R(rep.u_sink),
        "endpoints_exact": rep.endpoints_exact,
        "in_unit_interval": rep.in_unit_interval,
        "dichotomy_ok": rep.dichotomy_ok,
        "lip_radius": R(rep.lip_radius),
        "localized_ok": rep.localized_ok,
        "vacuous": rep.vacuous,
        "outside": list(rep.outside),
    }


def _check_section(chk) -> dict:
    R = io.real
    return {"lhs": R(chk.lhs), "rhs": R(chk.rhs),
            "ratio": R(chk.lhs / chk.rhs) if chk.rhs > 0 else None, "passed": chk.passed}


def _poincare_section(space, graph, side, sep, s, t, config, lip_radius, rng) -> dict:
    R = io.real
    dist_fn = space.dist[s] / space.dist[s, t]
    out = {
        "pointwise_distance": _check_section(
            pointwise_pi_check(space, dist_fn, s, t, config.c0, lip_radius)),
    }
    cut_side = sep[0] if sep is not None else side
    u = cut_function(graph, cut_side, space).values
    out["pointwise_cut"] = _check_section(
        pointwise_pi_check(space, u, s, t, config.c0, lip_radius))
    bridge = cut_pi_bridge(space, graph, side)
    out["cut_bridge"] = {"cut_capacity": R(bridge.cut_capacity),
                         "localized_integral": R(bridge.localized_integral),
                         "ratio": R(bridge.ratio)}
    survey = pi_survey(space, config.num_balls, rng, config.lam, lip_radius)
    out["balls"] = {"tests": config.num_balls, "lambda": config.lam,
                    "worst_ratio": R(survey.worst_ratio), "flagged": len(survey.flagged),
                    "oscillation_violations": len(survey.oscillation_violations)}
    return out


def sweep_scales(config: PipelineConfig, n_min: int, n_max: int, space: Optional[Space] = None):
    """One report per scale in ``n_min .. n_max`` plus a stability summary.

    Per-scale errors are recorded and the sweep continues.
    """
    if n_min > n_max:
        raise InvalidInputError("n_min must not exceed n_max")
    if space is None:
        space = load_space_spec(config.space)
    reports, errors = {}, {}
    for n in range(n_min, n_max + 1):
        cfg = PipelineConfig(**{**config.echo(), "scale": n})
        try:
            reports[n] = run_pipeline(cfg, space)
        except InvalidInputError as exc:
            errors[n] = str(exc)
    return reports, summarize_sweep(reports, errors)


def summarize_sweep(reports: dict, errors: dict) -> dict:
    R = io.real
    cuts = {n: float(Fraction(r.data["min_cut"]["capacity"])) for n, r in reports.items()}
    pcs = {n: r.data.get("pc_inequality", {}).get("max_ratio") for n, r in reports.items()}
    dens = {n: r.data.get("density", {}).get("max_ratio") for n, r in reports.items()}
    summary = {
        "scales": sorted(reports),
        "errors": {str(n): msg for n, msg in sorted(errors.items())},
        "status": {str(n): r.data["status"] for n, r in sorted(reports.items())},
        "min_cut": {str(n): R(c) for n, c in sorted(cuts.items())},
        "pc_constant": {str(n): v for n, v in sorted(pcs.items())},
        "density_max_ratio": {str(n): v for n, v in sorted(dens.items())},
    }
    if cuts:
        coarsest = cuts[min(cuts)]
        floor = min(cuts.values())
        summary["min_cut_floor"] = R(floor)
        summary["min_cut_floor_over_coarsest"] = R(floor / coarsest) if coarsest else None
    for key, vals in (("pc_constant_spread", pcs), ("density_spread", dens)):
        vs = [v for v in vals.values() if v]
        summary[key] = R(max(vs) / min(vs)) if vs else None
    return summary


def report_schema() -> dict:
    """JSON schema that every pipeline report validates against."""
    return json.loads(files(__package__).joinpath("report.schema.json").read_text())
