"""Command-line front end.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure
(e.g. a ratio against a zero baseline).
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .analytic import (
    attack_stats,
    baseline_stats,
    loss_fluctuation_equivalent,
    ratio_report,
    solve_y,
    solve_z0,
)
from .config_file import read_assignments
from .model import (
    AttackParams,
    AttackScenario,
    ConfigError,
    DegenerateBaselineError,
    CONFIG_KEYS,
    DetectionStats,
    Discrimination,
    ProtocolConfig,
    validate_config,
)
from .montecarlo import Source, compare_to_analytic, simulate, write_records
from .montecarlo.optics import build_table, expected_stats
from .optimizer import DEFAULT_GRID_STEP, TABLE_TITLES, optimize, reproduce_tables

COMMANDS = ("baseline", "attack", "optimize", "simulate", "tables", "loss-equiv")
STAT_COLUMNS = ("p_d0", "p_d1", "p_d2", "p_d0_opp")
RATIO_COLUMNS = ("r_d0", "r_d1", "r_d2", "r_d0_opp")
PARAM_COLUMNS = ("x", "y", "z", "z0")


@dataclass
class RunSpec:
    command: str
    config_path: str | None = None
    overrides: dict[str, str] = field(default_factory=dict)
    output_format: str = "markdown"
    seed: int | None = None
    pulses: int | None = None
    # command-specific options (scenario, x, z, table, deviation, ...)
    options: dict = field(default_factory=dict)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _num(value: float) -> str:
    # repr round-trips exactly
    return repr(float(value))


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (str, int)) else _num(v) for v in row])
    return buf.getvalue()


def _markdown(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _prob(p: float) -> str:
    return f"{p:.6g}"


def _fixed(v: float) -> str:
    return f"{v:.5f}"


def _stats_rows(stats: DetectionStats) -> list[list[str]]:
    return [[name, _prob(value)] for name, value in stats.items()]


def _resolve_scenario(spec: RunSpec, cfg: ProtocolConfig, raw: dict, default: AttackScenario | None) -> tuple[ProtocolConfig, AttackScenario]:
    """Pick the scenario; an unpinned discrimination follows the scenario."""
    name = spec.options.get("scenario")
    scenario = AttackScenario(name) if name else default
    if scenario is None:
        scenario = AttackScenario.combined_for(cfg.discrimination)
    required = scenario.discrimination
    if required is not None and required is not cfg.discrimination:
        if "discrimination" in raw:
            raise ConfigError(
                "discrimination",
                f"scenario {scenario.value} requires discrimination = {required.value}",
            )
        cfg = cfg.replace(discrimination=required)
    return cfg, scenario


def _attack_params(spec: RunSpec, cfg: ProtocolConfig, scenario: AttackScenario) -> AttackParams:
    opts = spec.options
    x = opts.get("x") or 0.0
    y = opts.get("y")
    z0 = opts.get("z0")
    if scenario.is_combined:
        if y is None:
            y = solve_y(cfg, x)
        if z0 is None:
            z0 = solve_z0(cfg, x) if scenario is AttackScenario.COMBINED_D0D2 else 0.0
    return AttackParams(x=x, y=y or 0.0, z=opts.get("z") or 0.0, z0=z0 or 0.0)


def _cmd_baseline(spec: RunSpec, cfg: ProtocolConfig, raw: dict) -> str:
    stats = baseline_stats(cfg)
    if spec.output_format == "csv":
        return _csv(STAT_COLUMNS, [stats.as_tuple()])
    return _markdown(("statistic", "probability"), _stats_rows(stats))


def _cmd_attack(spec: RunSpec, cfg: ProtocolConfig, raw: dict) -> str:
    cfg, scenario = _resolve_scenario(spec, cfg, raw, None)
    params = _attack_params(spec, cfg, scenario)
    stats = attack_stats(cfg, scenario, params)
    report = ratio_report(stats, baseline_stats(cfg))
    return _report_output(spec, [stats], [report], [params])


def _report_output(spec, stats_list, reports, params_list) -> str:
    if spec.output_format == "csv":
        header = (*STAT_COLUMNS, *RATIO_COLUMNS, *PARAM_COLUMNS, "max_deviation")
        if not stats_list:
            header = (*RATIO_COLUMNS, *PARAM_COLUMNS, "max_deviation")
        rows = []
        for i, (report, params) in enumerate(zip(reports, params_list)):
            row = []
            if stats_list:
                row += stats_list[i].as_tuple()
            row += [*report.as_tuple(), params.x, params.y, params.z, params.z0, report.max_deviation]
            rows.append(row)
        return _csv(header, rows)
    out = []
    for i, (report, params) in enumerate(zip(reports, params_list)):
        rows = []
        if stats_list:
            rows += _stats_rows(stats_list[i])
        rows += [[name, _fixed(v)] for name, v in zip(RATIO_COLUMNS, report.as_tuple())]
        rows += [[name, _fixed(getattr(params, name))] for name in PARAM_COLUMNS]
        rows.append(["max_deviation", _fixed(report.max_deviation)])
        out.append(_markdown(("quantity", "value"), rows))
    return "\n".join(out)


def _cmd_optimize(spec: RunSpec, cfg: ProtocolConfig, raw: dict) -> str:
    cfg, scenario = _resolve_scenario(spec, cfg, raw, None)
    result = optimize(cfg, scenario, spec.options.get("grid_step") or DEFAULT_GRID_STEP)
    text = _report_output(spec, [], [result.report], [result.params])
    if spec.output_format != "csv":
        text += f"\ngrid step {result.grid_step:g}, {result.evaluations} evaluations\n"
    return text


def render_table(cells, output_format: str) -> str:
    """Format a reproduced table: one sub-table per discrimination setting."""
    if output_format == "csv":
        header = ("table", "discrimination", "column", *RATIO_COLUMNS, *PARAM_COLUMNS, "max_deviation")
        rows = []
        for cell in cells:
            p, r = cell.result.params, cell.result.report
            rows.append([cell.table, cell.discrimination.value, cell.column, *r.as_tuple(), p.x, p.y, p.z, p.z0, r.max_deviation])
        return _csv(header, rows)

    blocks = []
    order: list[Discrimination] = []
    for cell in cells:
        if cell.discrimination not in order:
            order.append(cell.discrimination)
    for disc in order:
        group = [c for c in cells if c.discrimination is disc]
        header = ("", *(c.column for c in group))
        rows = [
            [name, *(_fixed(getattr(c.result.report, name)) for c in group)] for name in RATIO_COLUMNS
        ]
        params = ["x", "y"]
        if disc is Discrimination.NONE:
            params.append("z")
        elif disc is Discrimination.D0D2:
            params.append("z0")
        rows += [[name, *(_fixed(getattr(c.result.params, name)) for c in group)] for name in params]
        blocks.append(f"### {TABLE_TITLES[disc]}\n\n" + _markdown(header, rows))
    title = f"## Table {cells[0].table}: attack efficiencies\n\n" if cells else ""
    return title + "\n".join(blocks)


def _cmd_tables(spec: RunSpec, cfg: ProtocolConfig, raw: dict) -> str:
    cells = reproduce_tables(spec.options["table"], spec.options.get("grid_step") or DEFAULT_GRID_STEP)
    return render_table(cells, spec.output_format)


def _cmd_simulate(spec: RunSpec, cfg: ProtocolConfig, raw: dict) -> str:
    if spec.seed is None or spec.pulses is None:
        raise ConfigError("simulate", "--seed and --pulses are required")
    cfg, scenario = _resolve_scenario(spec, cfg, raw, AttackScenario.BASELINE)
    source = Source(spec.options.get("source") or "coherent")
    params = _attack_params(spec, cfg, scenario)
    records_path = spec.options.get("records")
    summary = simulate(
        cfg,
        scenario,
        params,
        source,
        spec.pulses,
        spec.seed,
        keep_records=bool(records_path),
        workers=spec.options.get("workers") or 1,
    )
    if records_path:
        with open(records_path, "w", newline="") as fh:
            write_records(summary, fh)

    if source is Source.SINGLE_PHOTON:
        table = build_table(cfg, scenario, single_photon=True)
        expected = DetectionStats(*expected_stats(table, scenario, params, single_photon=True))
    elif scenario.is_combined:
        expected = attack_stats(cfg, scenario, params)
    else:
        # the blind-and-reduce-losses attack aims at the honest statistics
        expected = baseline_stats(cfg)
    scores = compare_to_analytic(summary, expected)

    if spec.output_format == "csv":
        header = [
            "scenario", "source", "pulses", "seed",
            *STAT_COLUMNS,
            *(f"expected_{name}" for name in STAT_COLUMNS),
            *(f"zscore_{name}" for name in STAT_COLUMNS),
            *PARAM_COLUMNS,
            "sifted_key_length", "qber", "eve_key_recovery",
        ]
        row = [
            scenario.value, source.value, summary.pulses, spec.seed,
            *summary.empirical.as_tuple(),
            *expected.as_tuple(),
            *(scores[name].z for name in STAT_COLUMNS),
            params.x, params.y, params.z, params.z0,
            summary.sifted_key_length, summary.qber, summary.eve_key_recovery,
        ]
        return _csv(header, [row])
    rows = [
        [name, str(summary.counts[name]), _prob(value), _prob(getattr(expected, name)), f"{scores[name].z:+.3f}" + (f" ({scores[name].exact})" if scores[name].exact else "")]
        for name, value in summary.empirical.items()
    ]
    text = _markdown(("statistic", "count", "empirical", "expected", "z-score"), rows)
    text += (
        f"\nscenario {scenario.value}, source {source.value}, pulses {summary.pulses}, seed {spec.seed}\n"
        f"x={params.x:.5f} y={params.y:.5f} z={params.z:.5f} z0={params.z0:.5f}\n"
        f"sifted key length {summary.sifted_key_length}, qber {summary.qber:.6g}, "
        f"eve key recovery {summary.eve_key_recovery:.6g}\n"
    )
    return text


def _cmd_loss_equiv(spec: RunSpec, cfg: ProtocolConfig, raw: dict) -> str:
    deviation = spec.options["deviation"]
    db = loss_fluctuation_equivalent(cfg, deviation)
    if spec.output_format == "csv":
        return _csv(("deviation", "fluctuation_db"), [[deviation, db]])
    return f"a {deviation:g} deviation in the least sensitive statistic equals {db:.4f} dB of extra channel loss\n"


_DISPATCH = {
    "baseline": _cmd_baseline,
    "attack": _cmd_attack,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "tables": _cmd_tables,
    "loss-equiv": _cmd_loss_equiv,
}


def run(spec: RunSpec) -> tuple[int, str]:
    """Execute one command; returns ``(exit_code, text)``."""
    try:
        if spec.command not in _DISPATCH:
            raise ConfigError("command", f"unknown command {spec.command!r}")
        raw = read_assignments(spec.config_path, spec.overrides)
        return 0, _DISPATCH[spec.command](spec, validate_config(raw), raw)
    except ConfigError as exc:
        return 1, f"configuration error: {exc}\n"
    except DegenerateBaselineError as exc:
        return 2, f"error: {exc}\n"
    except ValueError as exc:
        return 1, f"invalid input: {exc}\n"
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 2
        return 2, f"error: {type(exc).__name__}: {exc}\n"


def _key_value(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def _unit(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument(
        "--set", dest="overrides", action="append", type=_key_value, default=[], metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    common.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    keys = common.add_argument_group("configuration keys (same as --set KEY=VALUE)")
    for key in CONFIG_KEYS:
        keys.add_argument("--" + key.replace("_", "-"), dest="cfg_" + key, metavar="VALUE")

    scenarios = [s.value for s in AttackScenario]
    attack_knobs = _Parser(add_help=False)
    attack_knobs.add_argument("--x", type=_unit, help="measurement probability")
    attack_knobs.add_argument("--y", type=_unit, help="forced D2 click probability (default: solved)")
    attack_knobs.add_argument("--z", type=_unit, help="faked-state probability (no-discrimination attack)")
    attack_knobs.add_argument("--z0", type=_unit, help="forced D0 click probability (default: solved)")

    p = _Parser(prog="cfqkd", description="Detector-blinding attacks on counterfactual QKD.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("baseline", parents=[common], help="expected detector statistics")

    a = sub.add_parser("attack", parents=[common, attack_knobs], help="statistics under a combined attack")
    a.add_argument("--scenario", choices=[s for s in scenarios if s.startswith("combined")],
                   help="default: the combined attack matching the configured discrimination")

    o = sub.add_parser("optimize", parents=[common], help="minimax search over Eve's parameters")
    o.add_argument("--scenario", choices=[s for s in scenarios if s.startswith("combined")])
    o.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)

    s = sub.add_parser("simulate", parents=[common, attack_knobs], help="pulse-level Monte Carlo")
    s.add_argument("--scenario", choices=scenarios, default="baseline")
    s.add_argument("--source", choices=[src.value for src in Source], default="coherent")
    s.add_argument("--pulses", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--records", metavar="PATH", help="write one CSV line per pulse")

    t = sub.add_parser("tables", parents=[common], help="reproduce a published attack-efficiency table")
    t.add_argument("table", choices=("I", "II"))
    t.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)

    e = sub.add_parser("loss-equiv", parents=[common], help="channel-loss fluctuation masking a deviation")
    e.add_argument("--deviation", type=float, required=True)
    return p


def spec_from_args(argv: Sequence[str] | None = None) -> RunSpec:
    ns = build_parser().parse_args(argv)
    overrides = dict(ns.overrides)
    options = {}
    for k, v in vars(ns).items():
        if k.startswith("cfg_"):
            if v is not None:
                overrides[k[4:]] = v
        elif k not in ("command", "config", "overrides", "format", "seed", "pulses"):
            options[k] = v
    return RunSpec(
        command=ns.command,
        config_path=ns.config,
        overrides=overrides,
        output_format=ns.format,
        seed=getattr(ns, "seed", None),
        pulses=getattr(ns, "pulses", None),
        options=options,
    )


def main(argv: Sequence[str] | None = None) -> int:
    try:
        spec = spec_from_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    code, text = run(spec)
    (sys.stdout if code == 0 else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
