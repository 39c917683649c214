"""The ``mgk`` command line.

Every leaf command accepts the common flags ``--seed``, ``--out``, ``--tol-*``,
``--log-level``, ``--log-format`` and ``--sentry-dsn``. Results go to ``--out``
(written atomically) or stdout; logs go to stderr.

Exit codes: 0 success, 1 verification failure or computation error, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import shlex
import sys
import tempfile
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

from ._processors import _plain
from .chain import (
    BasedChainComplex,
    GradedEndomorphism,
    direct_sum_with_elementary,
    extend_propagator,
    handle_slide_boundary,
    random_acyclic_complex,
    random_propagator,
    random_square_zero,
    reduced_complex,
    solve_homotopy,
    solve_propagator,
    transport_propagator,
    verify_handle_slide,
)
from .chamber import chamber_invariance, scan_interpolation
from .complex import (
    build_star_relations,
    colored_space,
    differential_d,
    differential_dprime,
    differential_dsecond,
    normalize,
    sample_graphs,
    verify_d_squared,
    verify_cycle_closed,
)
from .config import Settings, load_system_config
from .errors import (
    ConfigError,
    DimensionError,
    InvalidCounts,
    MalformedGraph,
    MorseGraphKitError,
    NoSolution,
)
from .gluing import central_differences, sigma_epsilon, tau_epsilon, tau_series
from .graph import (
    ColorScheme,
    GraphVector,
    LabeledGraph,
    canonical_form,
    enumerate_graphs,
    enumerate_labelings,
    theta_graph,
)
from .invariant import CountsVector, assemble_z, graph_key, z23_pipeline
from .logs import configure_logging
from .morse import MorseSystem, Point, flow, morse_complex
from .reports import VerificationReport
from .theta import count_theta_flows
from .trace import TraceAssignment, verify_xi_trace, verify_tr_closedness

SENTRY_ENV = "MGK_SENTRY_DSN"
TOLERANCES = ("crit", "nd", "sol", "jac", "dedup", "ms")

Handler = Callable[[argparse.Namespace], int]


class UsageError(Exception):
    """Bad arguments detected after parsing."""


# -- output -------------------------------------------------------------------


def _write(args: argparse.Namespace, text: str) -> None:
    """Write ``text`` to ``--out`` atomically, or to stdout."""
    if args.out is None:
        sys.stdout.write(text)
        return
    target = Path(args.out)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(args: argparse.Namespace, payload: Any) -> None:
    if isinstance(payload, dict) and "reproduce" not in payload:
        payload = {**payload, "reproduce": args.reproduce}
    _write(args, json.dumps(_plain(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def _emit_lines(args: argparse.Namespace, records: Sequence[Any]) -> None:
    lines = [json.dumps(_plain(r), sort_keys=True, ensure_ascii=False) for r in records]
    _write(args, "".join(line + "\n" for line in lines))


def _emit_report(args: argparse.Namespace, report: VerificationReport) -> int:
    report.reproduce = args.reproduce
    _emit(args, report.to_json())
    return 0 if report.passed else 1


# -- inputs -------------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError("file not found", path) from exc


def _read_json(path: str) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc})", path) from exc


def _load_complex(path: str) -> BasedChainComplex:
    data = _read_json(path)
    try:
        return BasedChainComplex.from_json(data)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"not a chain complex ({exc})", path) from exc


def _elementary_scheme(m: int) -> ColorScheme:
    return ColorScheme(
        tuple(
            BasedChainComplex.elementary(label % 3, ("p", "q"), max_degree=3)
            for label in range(m)
        )
    )


def _random_scheme(rng: random.Random, m: int, max_generators: int) -> ColorScheme:
    return ColorScheme(tuple(random_acyclic_complex(rng, max_generators) for _ in range(m)))


def _load_scheme(path: str | None, m: int) -> ColorScheme:
    """``{"complexes": [...]}`` per label, a single complex used for every
    label, or the trivial scheme when no file is given."""
    if path is None:
        return ColorScheme.trivial(m)
    data = _read_json(path)
    try:
        if isinstance(data, dict) and "complexes" in data:
            complexes = tuple(BasedChainComplex.from_json(c) for c in data["complexes"])
            if len(complexes) != m:
                raise ConfigError(f"expected {m} complexes, got {len(complexes)}", path)
            return ColorScheme(complexes)
        return ColorScheme.uniform(BasedChainComplex.from_json(data), m)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"not a complex list ({exc})", path) from exc


def _label_count(path: str | None, counts: Any) -> int:
    """Edge labels of an ``invariant assemble`` run: one per listed complex,
    else the most labels on a graph of the counts document."""
    if path is not None:
        data = _read_json(path)
        if isinstance(data, dict) and isinstance(data.get("complexes"), list):
            return len(data["complexes"])
    shape = CountsVector.from_json(counts)
    if not shape.counts:
        raise UsageError("cannot infer --m from an empty counts document")
    return max(len(graph.labels) for graph in shape.counts)


def _scheme_for(args: argparse.Namespace, rng: random.Random) -> ColorScheme:
    if getattr(args, "complexes", None) is not None:
        return _load_scheme(args.complexes, args.m)
    if getattr(args, "random_complexes", False):
        return _random_scheme(rng, args.m, args.max_generators)
    return _elementary_scheme(args.m)


def _load_vector(path: str, scheme: ColorScheme | None) -> GraphVector:
    return GraphVector.from_jsonl(_read_text(path), scheme)


def _load_graph(path: str | None) -> LabeledGraph:
    if path is None:
        return theta_graph()
    return LabeledGraph.from_json(_read_json(path))


def _parse_floats(text: str, count: int, key: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"{key}: expected comma-separated numbers") from exc
    if len(values) != count:
        raise UsageError(f"{key}: expected {count} numbers, got {len(values)}")
    return values


def _settings(args: argparse.Namespace, base: Settings) -> Settings:
    overrides = {name: getattr(args, f"tol_{name}") for name in TOLERANCES}
    settings = base.with_tolerances(**overrides)
    if args.seed is not None:
        settings = replace(settings, seed=args.seed)
    return settings


def _system(args: argparse.Namespace, path: str | None = None) -> MorseSystem:
    config = load_system_config(path or args.config)
    system = MorseSystem.from_config(config)
    return system.with_settings(_settings(args, config.settings))


def _rng(args: argparse.Namespace) -> random.Random:
    return random.Random(args.seed if args.seed is not None else 0)


# -- graphs -------------------------------------------------------------------


def cmd_graphs_enumerate(args: argparse.Namespace) -> int:
    scheme = _load_scheme(args.complexes, args.m) if args.complexes else None
    eta = _parse_ints(args.eta, args.m, "--eta") if args.eta else None
    graphs = enumerate_graphs(args.n, args.m, eta, scheme, trivalent_only=not args.bivalent)
    _emit_lines(args, [g.to_json() for g in graphs])
    return 0


def cmd_graphs_labelings(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    records = [
        {"labeling": labeling.to_json(), "graph": relabeled.to_json()}
        for labeling, relabeled in enumerate_labelings(graph)
    ]
    _emit_lines(args, records)
    return 0


def cmd_graphs_canonical(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    canonical, sign = canonical_form(graph, args.permute_labels)
    _emit(args, {"canonical": canonical.to_json(), "sign": sign})
    return 0


def cmd_graphs_closure(args: argparse.Namespace) -> int:
    graph = _load_graph(args.graph)
    closure = graph.closure()
    _emit(args, {"closure": closure.to_json(), "connected": closure.is_connected()})
    return 0


# -- gc -----------------------------------------------------------------------


def _gc_apply(args: argparse.Namespace, op: Callable[[GraphVector, ColorScheme], GraphVector]) -> int:
    scheme = _load_scheme(args.complexes, args.m)
    v = _load_vector(args.input, scheme)
    _write(args, op(v, scheme).to_jsonl())
    return 0


def cmd_gc_d(args: argparse.Namespace) -> int:
    v = _load_vector(args.input, None)
    _write(args, differential_d(v).to_jsonl())
    return 0


def cmd_gc_dprime(args: argparse.Namespace) -> int:
    return _gc_apply(args, differential_dprime)


def cmd_gc_dsecond(args: argparse.Namespace) -> int:
    return _gc_apply(args, differential_dsecond)


def cmd_gc_normalize(args: argparse.Namespace) -> int:
    return _gc_apply(args, normalize)


def cmd_gc_verify_d2(args: argparse.Namespace) -> int:
    graphs = enumerate_graphs(args.n, args.m)
    graphs = sample_graphs(graphs, args.samples, _rng(args)) if args.samples else graphs
    return _emit_report(args, verify_d_squared(graphs))


def cmd_gc_quotient(args: argparse.Namespace) -> int:
    if args.complexes is None:
        space = build_star_relations(args.n, args.m)
    elif args.xi:
        space = colored_space(args.n, args.m, _load_scheme(args.complexes, args.m))
    else:
        space = build_star_relations(args.n, args.m, _load_scheme(args.complexes, args.m))
    _emit(
        args,
        {
            "space": space.name,
            "dimension": space.dimension,
            "relations": space.relation_count,
            "basis": [g.to_json() for g in space.basis],
        },
    )
    return 0


# -- prop ---------------------------------------------------------------------


def _load_endomorphism(path: str, complex: BasedChainComplex) -> GradedEndomorphism:
    data = _read_json(path)
    try:
        return GradedEndomorphism.from_json(complex, data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"not an endomorphism ({exc})", path) from exc


def cmd_prop_solve(args: argparse.Namespace) -> int:
    complex = _load_complex(args.complex)
    try:
        g = solve_propagator(complex)
    except NoSolution as exc:
        _emit(args, {"error": str(exc), "certificate": exc.certificate})
        return 1
    _emit(args, {"propagator": g.to_json()})
    return 0


def cmd_prop_homotopy(args: argparse.Namespace) -> int:
    complex = _load_complex(args.complex)
    g1 = _load_endomorphism(args.g1, complex)
    g2 = _load_endomorphism(args.g2, complex)
    _emit(args, {"homotopy": solve_homotopy(g1, g2).to_json()})
    return 0


def cmd_prop_handle_slide(args: argparse.Namespace) -> int:
    complex = _load_complex(args.complex)
    h = _load_endomorphism(args.h, complex)
    slid = handle_slide_boundary(complex, h)
    payload: dict[str, Any] = {"complex": slid.to_json()}
    if args.g is not None:
        g = _load_endomorphism(args.g, complex)
        payload["propagator"] = transport_propagator(g, h, slid).to_json()
    _emit(args, payload)
    return 0


def cmd_prop_birth(args: argparse.Namespace) -> int:
    complex = _load_complex(args.complex)
    names = tuple(args.names.split(","))
    if len(names) != 2:
        raise UsageError("--names: expected two comma-separated generator names")
    born = direct_sum_with_elementary(complex, args.degree, names)
    g = _load_endomorphism(args.g, complex) if args.g else solve_propagator(complex)
    _emit(args, {"complex": born.to_json(), "propagator": extend_propagator(g, born, names).to_json()})
    return 0


def cmd_prop_reduce(args: argparse.Namespace) -> int:
    complex = _load_complex(args.complex)
    try:
        reduced = reduced_complex(complex, args.top, args.bottom)
    except NoSolution as exc:
        _emit(args, {"error": str(exc), "certificate": exc.certificate})
        return 1
    _emit(args, {"complex": reduced.to_json()})
    return 0


# -- verify -------------------------------------------------------------------


def _random_assignment(rng: random.Random, scheme: ColorScheme) -> TraceAssignment:
    return TraceAssignment(tuple(random_propagator(rng, c) for c in scheme.complexes))


def cmd_verify_cycle_closed(args: argparse.Namespace) -> int:
    scheme = _scheme_for(args, _rng(args))
    return _emit_report(args, verify_cycle_closed(args.n, args.m, scheme))


def cmd_verify_xi_trace(args: argparse.Namespace) -> int:
    rng = _rng(args)
    scheme = _scheme_for(args, rng)
    report = VerificationReport(check="xi-trace")
    for k in range(args.samples):
        report.merge(verify_xi_trace(args.n, args.m, scheme, _random_assignment(rng, scheme)), f"sample{k}")
    return _emit_report(args, report)


def cmd_verify_independence(args: argparse.Namespace) -> int:
    rng = _rng(args)
    scheme = _scheme_for(args, rng)
    report = VerificationReport(check="independence")
    for k in range(args.samples):
        g1 = _random_assignment(rng, scheme)
        g2 = _random_assignment(rng, scheme)
        sub = verify_tr_closedness(
            args.n, args.m, scheme, g1, g2, max_functionals=args.functionals, rng=rng
        )
        report.merge(sub, f"sample{k}")
    return _emit_report(args, report)


def cmd_verify_handle_slide(args: argparse.Namespace) -> int:
    rng = _rng(args)
    report = VerificationReport(check="handle-slide")
    done = 0
    while done < args.samples:
        complex = random_acyclic_complex(rng, args.max_generators)
        try:
            h = random_square_zero(rng, complex)
        except DimensionError:
            continue
        report.merge(verify_handle_slide(complex, h, random_propagator(rng, complex)), f"sample{done}")
        done += 1
    return _emit_report(args, report)


def cmd_verify_sigma(args: argparse.Namespace) -> int:
    report = VerificationReport(check="sigma")
    closed = tau_epsilon(args.u_series, args.eps)
    series = tau_series(args.u_series, args.eps, args.terms)
    if abs(closed - series) > 1e-10:
        report.fail(part="series", closed=closed, series=series)
    sigma = sigma_epsilon(args.u, args.eps)
    derivatives = central_differences(args.u, args.eps)
    if abs(sigma) >= 1e-6:
        report.fail(part="sigma", value=sigma)
    for order, value in enumerate(derivatives, start=1):
        if abs(value) >= 1e-4:
            report.fail(part="derivative", order=order, value=value)
    report.stats = {
        "tau": closed,
        "series": series,
        "sigma": sigma,
        "derivatives": derivatives,
        "eps": args.eps,
    }
    return _emit_report(args, report)


# -- flow ---------------------------------------------------------------------


def cmd_flow_critical(args: argparse.Namespace) -> int:
    system = _system(args)
    validation = system.validate()
    functions = {
        fn.name: [cp.to_json() for cp in system.critical_points(i)]
        for i, fn in enumerate(system.functions)
    }
    _emit(args, {"critical_points": functions, "validation": validation})
    return 0


def cmd_flow_integrate(args: argparse.Namespace) -> int:
    system = _system(args)
    start = Point.from_ambient(_parse_floats(args.point, 4, "--point"))
    end = flow(system, args.function, start, args.time)
    fn = system.function(args.function)
    _emit(
        args,
        {
            "start": start.to_json(),
            "end": end.to_json(),
            "time": args.time,
            "values": [fn.value(start), fn.value(end)],
        },
    )
    return 0


def cmd_flow_complex(args: argparse.Namespace) -> int:
    system = _system(args)
    complex = morse_complex(system, args.function)
    points = [cp.to_json() for cp in system.critical_points(args.function)]
    _emit(
        args,
        {
            "complex": complex.to_json(),
            "critical_points": points,
            "homology": complex.homology_dimensions(),
        },
    )
    return 0


def cmd_flow_count_theta(args: argparse.Namespace) -> int:
    system = _system(args)
    _emit(args, count_theta_flows(system).to_json())
    return 0


def cmd_flow_scan(args: argparse.Namespace) -> int:
    start = _system(args)
    end = _system(args, args.end)
    _emit(args, scan_interpolation(start, end, args.step).to_json())
    return 0


# -- invariant ----------------------------------------------------------------


def cmd_invariant_z(args: argparse.Namespace) -> int:
    if args.k != 1:
        raise UsageError("only k = 1 has a geometric counting engine; use 'invariant assemble'")
    _, report = z23_pipeline(_system(args))
    _emit(args, report)
    return 0 if report["covariance"]["passed"] else 1


def cmd_invariant_assemble(args: argparse.Namespace) -> int:
    data = _read_json(args.counts)
    n, m = args.n, args.m
    if m is None:
        m = _label_count(args.complexes, data)
    scheme = _load_scheme(args.complexes, m)
    counts = CountsVector.from_json(data, scheme)
    if args.propagators is not None:
        raw = _read_json(args.propagators)
        try:
            maps = tuple(
                GradedEndomorphism.from_json(c, entry)
                for c, entry in zip(scheme.complexes, raw["propagators"], strict=True)
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"expected one propagator per label ({exc})", args.propagators) from exc
        g = TraceAssignment(maps)
    else:
        g = TraceAssignment(tuple(solve_propagator(c) for c in scheme.complexes))
    try:
        z = assemble_z(counts, g, n, m, validate=not args.no_validate)
    except InvalidCounts as exc:
        _emit(args, {"error": str(exc), "violations": exc.violations})
        return 1
    _emit(
        args,
        {
            **z.to_json(),
            "per_graph": {graph_key(graph): count for graph, count in counts.items()},
            "anomaly": None,
        },
    )
    return 0


def cmd_invariant_chamber(args: argparse.Namespace) -> int:
    report, detail = chamber_invariance(_system(args), _system(args, args.end), args.step)
    report.reproduce = args.reproduce
    _emit(args, {**report.to_json(), "detail": detail})
    return 0 if report.passed else 1


# -- parser -------------------------------------------------------------------


def _parse_ints(text: str, count: int, key: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"{key}: expected comma-separated integers") from exc
    if len(values) != count:
        raise UsageError(f"{key}: expected {count} integers, got {len(values)}")
    return values


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for all sampling")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    for name in TOLERANCES:
        common.add_argument(f"--tol-{name}", type=float, default=None, dest=f"tol_{name}")
    common.add_argument(
        "--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"]
    )
    common.add_argument("--log-format", default="auto", choices=["json", "console", "auto"])
    common.add_argument("--sentry-dsn", default=os.environ.get(SENTRY_ENV))
    return common


def _size(parser: argparse.ArgumentParser, n: int | None = 2, m: int | None = 3) -> None:
    parser.add_argument("--n", type=int, default=n)
    parser.add_argument("--m", type=int, default=m)


def _scheme_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--complexes", "--complex", dest="complexes", default=None,
        help="JSON complexes (default: elementary)",
    )
    parser.add_argument("--random-complexes", action="store_true")
    parser.add_argument("--max-generators", type=int, default=6)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="mgk", description="Graph complexes, propagators and Morse flow counting."
    )
    groups = parser.add_subparsers(dest="group", required=True)

    def leaf(
        group: Any, name: str, handler: Handler, help: str, aliases: Sequence[str] = ()
    ) -> argparse.ArgumentParser:
        sub = group.add_parser(name, parents=[common], help=help, aliases=list(aliases))
        sub.set_defaults(handler=handler)
        return sub

    graphs = groups.add_parser("graphs", help="graph enumeration").add_subparsers(
        dest="command", required=True
    )
    sub = leaf(graphs, "enumerate", cmd_graphs_enumerate, "labeled graphs as JSON lines")
    _size(sub)
    sub.add_argument("--eta", default=None, help="edge degrees, e.g. 1,2,1")
    sub.add_argument("--complexes", default=None)
    sub.add_argument("--bivalent", action="store_true", help="include broken edges")
    for name, handler, text in (
        ("labelings", cmd_graphs_labelings, "all relabelings with signs"),
        ("canonical", cmd_graphs_canonical, "canonical form under label change"),
        ("closure", cmd_graphs_closure, "closure of a graph"),
    ):
        sub = leaf(graphs, name, handler, text)
        sub.add_argument("--graph", default=None, help="graph JSON (default: Θ)")
        if name == "canonical":
            sub.add_argument(
                "--permute-labels", action=argparse.BooleanOptionalAction, default=None
            )

    gc = groups.add_parser("gc", help="graph complex differentials").add_subparsers(
        dest="command", required=True
    )
    sub = leaf(gc, "d", cmd_gc_d, "contraction differential")
    sub.add_argument("--input", required=True)
    for name, handler in (
        ("dprime", cmd_gc_dprime),
        ("dsecond", cmd_gc_dsecond),
        ("normalize", cmd_gc_normalize),
    ):
        sub = leaf(gc, name, handler, f"apply {name} to a JSON-lines vector")
        sub.add_argument("--input", required=True)
        sub.add_argument("--complexes", default=None)
        sub.add_argument("--m", type=int, default=3)
    sub = leaf(gc, "verify-d2", cmd_gc_verify_d2, "check d∘d = 0")
    _size(sub)
    sub.add_argument("--samples", type=int, default=0, help="sample size (0: all graphs)")
    sub = leaf(gc, "quotient", cmd_gc_quotient, "quotient space dimension and basis")
    _size(sub)
    sub.add_argument("--complexes", default=None)
    sub.add_argument("--xi", action="store_true", help="also quotient by ξ-relations")

    prop = groups.add_parser("prop", help="propagators").add_subparsers(
        dest="command", required=True
    )
    sub = leaf(prop, "solve", cmd_prop_solve, "propagator of an acyclic complex")
    sub.add_argument("--complex", required=True)
    sub = leaf(prop, "homotopy", cmd_prop_homotopy, "homotopy between two propagators")
    sub.add_argument("--complex", required=True)
    sub.add_argument("--g1", required=True)
    sub.add_argument("--g2", required=True)
    sub = leaf(prop, "handle-slide", cmd_prop_handle_slide, "handle-slid complex")
    sub.add_argument("--complex", required=True)
    sub.add_argument("--h", required=True)
    sub.add_argument("--g", default=None, help="propagator to transport")
    sub = leaf(prop, "birth", cmd_prop_birth, "direct sum with an elementary pair")
    sub.add_argument("--complex", required=True)
    sub.add_argument("--degree", type=int, required=True)
    sub.add_argument("--names", default="p+,q+")
    sub.add_argument("--g", default=None)
    sub = leaf(prop, "reduce", cmd_prop_reduce, "quotient by top and bottom generators")
    sub.add_argument("--complex", required=True)
    sub.add_argument("--top", required=True)
    sub.add_argument("--bottom", required=True)

    verify = groups.add_parser("verify", help="exact identity checks").add_subparsers(
        dest="command", required=True
    )
    sub = leaf(
        verify,
        "cycle-closed",
        cmd_verify_cycle_closed,
        "universal cycle is closed",
        aliases=["lemma-2-1"],
    )
    _size(sub)
    _scheme_flags(sub)
    for name, handler, alias in (
        ("xi-trace", cmd_verify_xi_trace, "lemma-2-2"),
        ("independence", cmd_verify_independence, "lemma-2-3"),
    ):
        sub = leaf(
            verify, name, handler, "trace identities over random propagators", aliases=[alias]
        )
        _size(sub)
        _scheme_flags(sub)
        sub.add_argument("--samples", type=int, default=20)
        if name == "independence":
            sub.add_argument("--functionals", type=int, default=None)
    sub = leaf(verify, "handle-slide", cmd_verify_handle_slide, "handle-slide identities")
    sub.add_argument("--samples", type=int, default=100)
    sub.add_argument("--max-generators", type=int, default=6)
    sub = leaf(verify, "sigma", cmd_verify_sigma, "flatness of the gluing function")
    sub.add_argument("--eps", type=float, default=1.0)
    sub.add_argument("--u", type=float, default=1e-4)
    sub.add_argument("--u-series", type=float, default=0.25)
    sub.add_argument("--terms", type=int, default=30)

    flow_group = groups.add_parser("flow", help="Morse functions on S³").add_subparsers(
        dest="command", required=True
    )
    sub = leaf(flow_group, "critical", cmd_flow_critical, "critical points")
    sub.add_argument("--config", required=True)
    sub = leaf(flow_group, "integrate", cmd_flow_integrate, "integrate the gradient flow")
    sub.add_argument("--config", required=True)
    sub.add_argument("--function", type=int, default=0)
    sub.add_argument("--point", required=True, help="ambient X1,X2,X3,X4")
    sub.add_argument("--time", type=float, required=True)
    sub = leaf(flow_group, "complex", cmd_flow_complex, "Morse complex")
    sub.add_argument("--config", required=True)
    sub.add_argument("--function", type=int, default=0)
    sub = leaf(flow_group, "count-theta", cmd_flow_count_theta, "signed Θ count")
    sub.add_argument("--config", required=True)
    sub = leaf(flow_group, "scan", cmd_flow_scan, "bifurcation scan")
    sub.add_argument("--config", required=True)
    sub.add_argument("--end", required=True)
    sub.add_argument("--step", type=float, default=1e-3)

    inv = groups.add_parser("invariant", help="Z assembly").add_subparsers(
        dest="command", required=True
    )
    sub = leaf(inv, "z", cmd_invariant_z, "principal term of Z_{2,3}")
    sub.add_argument("--config", required=True)
    sub.add_argument("--k", type=int, default=1)
    sub = leaf(inv, "assemble", cmd_invariant_assemble, "Z from supplied counts")
    sub.add_argument("--counts", required=True)
    sub.add_argument("--complexes", default=None)
    sub.add_argument("--propagators", default=None)
    _size(sub, None, None)
    sub.add_argument("--no-validate", action="store_true")
    sub = leaf(inv, "chamber", cmd_invariant_chamber, "chamber invariance of Z_{2,3}")
    sub.add_argument("--config", required=True)
    sub.add_argument("--end", required=True)
    sub.add_argument("--step", type=float, default=1e-3)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.reproduce = shlex.join(["mgk", *argv])

    log = configure_logging(
        log_level=getattr(logging, args.log_level),
        sentry_dsn=args.sentry_dsn,
        renderer=args.log_format,
    ).bind(command=f"{args.group} {args.command}")
    try:
        return args.handler(args)
    except ConfigError as exc:
        log.error("configuration error", key=exc.key, error=str(exc))
        print(f"mgk: {exc}", file=sys.stderr)
        return 2
    except MalformedGraph as exc:
        log.error("malformed input", error=str(exc))
        print(f"mgk: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"mgk: {exc}", file=sys.stderr)
        return 2
    except MorseGraphKitError as exc:
        log.error("command failed", error=str(exc), kind=type(exc).__name__)
        print(f"mgk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (KeyError, IndexError, ValueError) as exc:
        message = exc.args[0] if exc.args else type(exc).__name__
        log.error("invalid input", error=str(message), kind=type(exc).__name__)
        print(f"mgk: {message}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
