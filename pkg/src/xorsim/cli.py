"""Command-line front end: config loading, sweep runs, CSV and SVG output.

Config files are YAML with nested sections (`topology`, `flows`, `channel`,
`sweep`); anything omitted falls back to the standard 16-node defaults. See
the README for the full schema.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from . import scenarios as scen
from .coding import Scheme
from .metrics import MetricsReport, csv_header, finalize
from .simulator import (
    DEFAULT_CHANNEL_RATE,
    DEFAULT_DURATION,
    DEFAULT_PACKET_SIZE,
    FlowSpec,
    Scenario,
    ScenarioInvalidError,
    Simulation,
)
from .topology import Topology, build_topology, random_layout

CHART_METRICS = (
    ("throughput_kbps", "delivered payload (kb/s)"),
    ("encoded_frac", "encoded transmission fraction"),
    ("pdr", "packet delivery ratio"),
    ("mean_delay_s", "mean end-to-end delay (s)"),
)


class ValidationError(Exception):
    """Bad config file: message names the offending key."""


@dataclass
class ExperimentPlan:
    """Everything run_plan needs: the base scenario knobs plus sweep axes."""

    nodes: int = 16
    side: float = 800.0
    radio_range: float = 200.0
    topology_seed: Optional[int] = None
    positions: Optional[list[tuple[float, float]]] = None
    flow_count: int = 2
    rate: float = 5.0
    packet_size: int = DEFAULT_PACKET_SIZE
    explicit_flows: Optional[list[dict]] = None
    channel_rate: float = DEFAULT_CHANNEL_RATE
    duration: float = DEFAULT_DURATION
    scheme: Scheme = Scheme.EXCODE
    seed: int = 0
    count_header_overhead: bool = False
    drain_grace: float = 0.0
    sweep_flows: Optional[list[int]] = None
    sweep_rates: Optional[list[float]] = None
    sweep_schemes: list[Scheme] = field(default_factory=lambda: list(Scheme))
    sweep_seeds: Optional[list[int]] = None


def parse_scheme(name: str) -> Scheme:
    try:
        return Scheme(name)
    except ValueError:
        valid = ", ".join(s.value for s in Scheme)
        raise ValidationError(f"scheme: unknown scheme {name!r} (valid: {valid})") from None


def load_config(path) -> ExperimentPlan:
    """Parse and validate a YAML config file into an ExperimentPlan."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"config parse error: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a mapping")

    plan = ExperimentPlan()
    known = {"topology", "flows", "channel", "sweep", "scheme", "seed", "duration",
             "count_header_overhead", "drain_grace"}
    for key in raw:
        if key not in known:
            raise ValidationError(f"unknown config key: {key}")

    topo = _section(raw, "topology", {"nodes", "side", "range", "seed", "positions"})
    plan.nodes = _num(topo, "topology.nodes", topo.get("nodes", plan.nodes), int, minimum=1)
    plan.side = _num(topo, "topology.side", topo.get("side", plan.side), float, minimum=1e-9)
    plan.radio_range = _num(topo, "topology.range", topo.get("range", plan.radio_range), float, minimum=1e-9)
    if "seed" in topo:
        plan.topology_seed = _num(topo, "topology.seed", topo["seed"], int)
    if "positions" in topo:
        pos = topo["positions"]
        if not isinstance(pos, list) or not all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in pos
        ):
            raise ValidationError("topology.positions must be a list of [x, y] pairs")
        plan.positions = [(float(x), float(y)) for x, y in pos]
        plan.nodes = len(plan.positions)

    flows = _section(raw, "flows", {"count", "rate", "packet_size", "list"})
    plan.flow_count = _num(flows, "flows.count", flows.get("count", plan.flow_count), int, minimum=0)
    plan.rate = _num(flows, "flows.rate", flows.get("rate", plan.rate), float, minimum=1e-9)
    plan.packet_size = _num(flows, "flows.packet_size", flows.get("packet_size", plan.packet_size), int, minimum=1)
    if "list" in flows:
        if not isinstance(flows["list"], list):
            raise ValidationError("flows.list must be a list of flow mappings")
        plan.explicit_flows = flows["list"]

    channel = _section(raw, "channel", {"rate_bps"})
    plan.channel_rate = _num(channel, "channel.rate_bps", channel.get("rate_bps", plan.channel_rate), float, minimum=1e-9)

    plan.duration = _num(raw, "duration", raw.get("duration", plan.duration), float, minimum=1e-9)
    plan.seed = _num(raw, "seed", raw.get("seed", plan.seed), int)
    plan.drain_grace = _num(raw, "drain_grace", raw.get("drain_grace", plan.drain_grace), float, minimum=0.0)
    if "scheme" in raw:
        plan.scheme = parse_scheme(str(raw["scheme"]))
    if "count_header_overhead" in raw:
        if not isinstance(raw["count_header_overhead"], bool):
            raise ValidationError("count_header_overhead must be true or false")
        plan.count_header_overhead = raw["count_header_overhead"]

    sweep = _section(raw, "sweep", {"flows", "rates", "schemes", "seeds"})
    if "flows" in sweep and "rates" in sweep:
        raise ValidationError("sweep: give either flows or rates, not both")
    if "flows" in sweep:
        plan.sweep_flows = [_num(sweep, "sweep.flows", v, int, minimum=0) for v in _as_list(sweep["flows"], "sweep.flows")]
    if "rates" in sweep:
        plan.sweep_rates = [_num(sweep, "sweep.rates", v, float, minimum=1e-9) for v in _as_list(sweep["rates"], "sweep.rates")]
    if "schemes" in sweep:
        plan.sweep_schemes = [parse_scheme(str(s)) for s in _as_list(sweep["schemes"], "sweep.schemes")]
    elif "scheme" in raw:
        plan.sweep_schemes = [plan.scheme]
    if "seeds" in sweep:
        plan.sweep_seeds = [_num(sweep, "sweep.seeds", v, int) for v in _as_list(sweep["seeds"], "sweep.seeds")]
    return plan


def _section(raw: dict, name: str, known: set) -> dict:
    sec = raw.get(name, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ValidationError(f"{name} must be a mapping")
    for key in sec:
        if key not in known:
            raise ValidationError(f"unknown config key: {name}.{key}")
    return sec


def _as_list(value, key: str) -> list:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{key} must be a non-empty list")
    return value


def _num(sec, key: str, value, kind, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key} must be a number")
    if kind is int and int(value) != value:
        raise ValidationError(f"{key} must be an integer")
    value = kind(value)
    if minimum is not None and value < minimum:
        raise ValidationError(f"{key} must be >= {minimum}")
    return value


# -- scenario assembly -------------------------------------------------------


def build_scenario(plan: ExperimentPlan, scheme: Scheme, seed: int,
                   flow_count: Optional[int] = None, rate: Optional[float] = None,
                   capture_trace: bool = True) -> Scenario:
    n_flows = plan.flow_count if flow_count is None else flow_count
    flow_rate = plan.rate if rate is None else rate
    topo = _plan_topology(plan, seed)
    if plan.explicit_flows is not None:
        flows = tuple(_flow_from_mapping(i, m, plan) for i, m in enumerate(plan.explicit_flows))
    else:
        flows = tuple(
            FlowSpec(flow=i, src=src, dst=dst, rate=flow_rate, packet_size=plan.packet_size)
            for i, (src, dst) in enumerate(scen._sample_endpoints(topo, n_flows, seed))
        )
    return Scenario(
        topology=topo,
        flows=flows,
        scheme=scheme,
        duration=plan.duration,
        channel_rate=plan.channel_rate,
        seed=seed,
        count_header_overhead=plan.count_header_overhead,
        drain_grace=plan.drain_grace,
        capture_trace=capture_trace,
    )


def _plan_topology(plan: ExperimentPlan, seed: int) -> Topology:
    if plan.positions is not None:
        return build_topology(plan.positions, plan.radio_range)
    tseed = plan.topology_seed if plan.topology_seed is not None else seed
    return build_topology(random_layout(plan.nodes, plan.side, tseed), plan.radio_range)


def _flow_from_mapping(index: int, m, plan: ExperimentPlan) -> FlowSpec:
    if not isinstance(m, dict):
        raise ValidationError(f"flows.list[{index}] must be a mapping")
    for key in m:
        if key not in {"flow", "src", "dst", "rate", "packet_size", "start", "stop"}:
            raise ValidationError(f"unknown config key: flows.list[{index}].{key}")
    try:
        return FlowSpec(
            flow=int(m.get("flow", index)),
            src=int(m["src"]),
            dst=int(m["dst"]),
            rate=float(m.get("rate", plan.rate)),
            packet_size=int(m.get("packet_size", plan.packet_size)),
            start=float(m.get("start", 0.0)),
            stop=None if m.get("stop") is None else float(m["stop"]),
        )
    except KeyError as exc:
        raise ValidationError(f"flows.list[{index}] missing key {exc}") from None


# -- sweep execution ---------------------------------------------------------


def run_plan(plan: ExperimentPlan, out_dir) -> list[MetricsReport]:
    """Run the whole sweep, write results.csv and one SVG per metric."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seeds = plan.sweep_seeds if plan.sweep_seeds is not None else [plan.seed]
    schemes = plan.sweep_schemes
    cells: list[tuple[Optional[int], Optional[float]]] = [(None, None)]
    if plan.sweep_flows is not None:
        cells = [(fc, None) for fc in plan.sweep_flows]
    elif plan.sweep_rates is not None:
        cells = [(None, r) for r in plan.sweep_rates]

    reports = []
    for flow_count, rate in cells:
        for scheme in schemes:
            for seed in seeds:
                scenario = build_scenario(plan, scheme, seed, flow_count, rate,
                                          capture_trace=False)
                sim = Simulation(scenario).run()
                reports.append(finalize(sim))

    csv_path = out / "results.csv"
    with open(csv_path, "w") as fh:
        fh.write(csv_header() + "\n")
        for rep in reports:
            fh.write(rep.csv_row() + "\n")
    write_charts(reports, out)
    return reports


def write_charts(reports: list[MetricsReport], out: Path) -> None:
    """One chart per metric: x = offered load, one line per scheme, seeds
    averaged. Generated straight from the report values."""
    by_scheme: dict[str, dict[int, list[MetricsReport]]] = {}
    for rep in reports:
        by_scheme.setdefault(rep.scheme, {}).setdefault(rep.flows, []).append(rep)

    for column, label in CHART_METRICS:
        series: dict[str, list[tuple[float, float]]] = {}
        for scheme, groups in sorted(by_scheme.items()):
            pts = []
            for flows_n in sorted(groups):
                reps = groups[flows_n]
                xs = [r.offered_kbps for r in reps]
                ys = [_metric_value(r, column) for r in reps]
                ys = [y for y in ys if y is not None]
                if not ys:
                    continue
                pts.append((sum(xs) / len(xs), sum(ys) / len(ys)))
            if pts:
                series[scheme] = pts
        write_svg_chart(out / f"{column}.svg", label, "offered load (kb/s)", label, series)


def _metric_value(rep: MetricsReport, column: str):
    return {
        "throughput_kbps": rep.throughput_kbps,
        "encoded_frac": rep.encoded_fraction,
        "pdr": rep.delivery_ratio,
        "mean_delay_s": rep.mean_delay_s,
    }[column]


SCHEME_COLORS = {"excode": "#c0392b", "cope": "#2471a3", "none": "#7d7d7d"}


def write_svg_chart(path, title: str, xlabel: str, ylabel: str,
                    series: dict[str, list[tuple[float, float]]]) -> None:
    """Tiny hand-rolled SVG line chart; byte-stable for identical inputs."""
    width, height = 640, 420
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    points = [p for pts in series.values() for p in pts]
    xs = [p[0] for p in points] or [0.0, 1.0]
    ys = [p[1] for p in points] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(min(ys), 0.0), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x: float) -> float:
        return ml + pw * (x - x0) / (x1 - x0)

    def py(y: float) -> float:
        return mt + ph * (1.0 - (y - y0) / (y1 - y0))

    def fmt(v: float) -> str:
        return f"{v:.6g}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(
            f'<text x="{px(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle">{fmt(xv)}</text>'
        )
        out.append(
            f'<text x="{ml - 6}" y="{py(yv) + 4:.1f}" text-anchor="end">{fmt(yv)}</text>'
        )
        if i:
            out.append(
                f'<line x1="{ml}" y1="{py(yv):.1f}" x2="{ml + pw}" y2="{py(yv):.1f}" '
                f'stroke="#dddddd"/>'
            )
    legend_y = mt + 6
    for name, pts in sorted(series.items()):
        color = SCHEME_COLORS.get(name, "#27ae60")
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{color}"/>')
        out.append(
            f'<rect x="{ml + pw - 110}" y="{legend_y}" width="12" height="12" fill="{color}"/>'
        )
        out.append(f'<text x="{ml + pw - 92}" y="{legend_y + 10}">{name}</text>')
        legend_y += 18
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


# -- regression fixtures + figures -------------------------------------------


def run_fixture_checks(out: Optional[Path] = None) -> list[tuple[str, bool, str]]:
    """Rerun the built-in example scenarios and check the expected coding
    behavior. Returns (name, passed, detail) triples."""
    from .simulator import run as run_sim

    checks: list[tuple[str, bool, str]] = []

    def check(name: str, passed: bool, detail: str) -> None:
        checks.append((name, bool(passed), detail))

    for fixture in ("chain", "cross"):
        build = scen.FIXTURES[fixture]
        tx = {s: run_sim(build(s)).total_tx for s in Scheme}
        check(
            f"{fixture}: relay coding saves one transmission",
            tx[Scheme.NON_CODING] == 4 and tx[Scheme.COPE] == 3 and tx[Scheme.EXCODE] == 3,
            f"tx none={tx[Scheme.NON_CODING]} cope={tx[Scheme.COPE]} excode={tx[Scheme.EXCODE]}",
        )

    for fixture in ("junction", "long-chain"):
        build = scen.FIXTURES[fixture]
        sims = {s: run_sim(build(s)) for s in Scheme}
        ex, cope = sims[Scheme.EXCODE], sims[Scheme.COPE]
        payload_ok = all(
            sim.delivered.keys() == sim.generated.keys()
            and all(sim.delivered[u][1].payload == sim.generated[u].payload for u in sim.generated)
            for sim in sims.values()
        )
        check(
            f"{fixture}: holder-set scheme codes at the shared relay",
            ex.encode_count >= 1 and ex.decode_failures == 0,
            f"encodes={ex.encode_count} decode_failures={ex.decode_failures}",
        )
        check(
            f"{fixture}: two-hop baseline finds no opportunity",
            cope.encode_count == 0,
            f"encodes={cope.encode_count}",
        )
        check(f"{fixture}: all payloads delivered bit-exact", payload_ok, "")
    return checks


def figures_command(out_dir) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name, passed, detail in run_fixture_checks(out):
        print(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))
        failures += 0 if passed else 1

    # relays must be kept busy for coding windows to open, so the sweep
    # drives them well past the ~488 pkt/s a 512-byte 2 Mb/s channel serves
    plan = ExperimentPlan(
        duration=4.0,
        rate=150.0,
        sweep_flows=[2, 4, 6, 8],
        sweep_seeds=list(range(5)),
    )
    reports = run_plan(plan, out)
    by_key: dict[tuple[int, int], dict[str, MetricsReport]] = {}
    for rep in reports:
        by_key.setdefault((rep.flows, rep.seed), {})[rep.scheme] = rep
    dominance = all(
        cell["excode"].encode_count >= cell["cope"].encode_count for cell in by_key.values()
    )
    print(f"[{'PASS' if dominance else 'FAIL'}] sweep: holder-set encodes >= two-hop encodes in every cell")
    failures += 0 if dominance else 1

    big = [cell for (flows_n, _), cell in by_key.items() if flows_n >= 4]
    gap = sum(c["excode"].encoded_fraction - c["cope"].encoded_fraction for c in big) / len(big)
    print(f"[{'PASS' if gap > 0 else 'FAIL'}] sweep: mean encoded-fraction gap positive at >=4 flows ({gap:.4f})")
    failures += 0 if gap > 0 else 1

    clean = all(rep.decode_failures == 0 for rep in reports)
    print(f"[{'PASS' if clean else 'FAIL'}] sweep: zero decode failures")
    failures += 0 if clean else 1

    print(f"wrote {out / 'results.csv'} and charts")
    return 1 if failures else 0


# -- entry point -------------------------------------------------------------


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="xorsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the sweep described by a config file")
    run_p.add_argument("--config", required=True, help="YAML config file")
    run_p.add_argument("--scheme", choices=[s.value for s in Scheme],
                       help="run only this scheme, overriding the config")
    run_p.add_argument("--seed", type=int, help="run only this seed, overriding the config")
    run_p.add_argument("--out", default="results", help="output directory")
    run_p.add_argument("--count-header-overhead", action="store_true",
                       help="charge holder bytes to airtime")

    fig_p = sub.add_parser("figures", help="rerun built-in scenarios and emit charts")
    fig_p.add_argument("--out", default="figures", help="output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            plan = load_config(args.config)
            if args.scheme is not None:
                plan.sweep_schemes = [parse_scheme(args.scheme)]
            if args.seed is not None:
                plan.sweep_seeds = [args.seed]
            if args.count_header_overhead:
                plan.count_header_overhead = True
            reports = run_plan(plan, args.out)
            print(f"wrote {len(reports)} runs to {Path(args.out) / 'results.csv'}")
            return 0
        return figures_command(args.out)
    except (ValidationError, ScenarioInvalidError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
