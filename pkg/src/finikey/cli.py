"""Command-line front end: ``rate``, ``sweep``, ``compare`` and ``selftest``.

Exit codes: 0 success, 2 domain error, 64 usage error, 73 output not writable.
``FINIKEY_THREADS`` caps the number of worker processes used by ``sweep``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidStateError
from .optimizer import OptimizationSpec, optimize_rate
from .protocol import AttackModel, Protocol, ProtocolSpec
from .rates import RatePoint, SecurityBudget, rate

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64
EXIT_CANTCREAT = 73

DEFAULT_EPS_TOTAL = 1e-9
CSV_COLUMNS = ("protocol", "attack", "N", "qber", "m_opt", "eps_pe", "eps_ec", "eps_pa", "eps_bar", "rate")
N_RANGE = (1e2, 1e16)
MAX_SWEEP_POINTS = 10_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def fmt(value: float) -> str:
    """Nine significant digits, locale independent."""
    return f"{value:.9g}"


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _models(text: str) -> list[AttackModel]:
    try:
        chosen = {AttackModel.parse(v) for v in text.split(",") if v.strip()}
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return [m for m in AttackModel if m in chosen]


def _protocol(text: str) -> Protocol:
    try:
        return Protocol.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _attack(text: str) -> AttackModel:
    try:
        return AttackModel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@dataclass(frozen=True)
class SweepRequest:
    protocol: ProtocolSpec
    models: tuple[AttackModel, ...]
    qbers: tuple[float, ...]
    n_min: float
    n_max: float
    n_count: int
    eps_total: float = DEFAULT_EPS_TOTAL
    output_format: str = "csv"
    output_path: str = "-"
    m_grid_density: int = 24
    eps_grid_density: int = 8

    def __post_init__(self):
        lo, hi = N_RANGE
        if not (lo <= self.n_min <= self.n_max <= hi):
            raise UsageError(f"N range must satisfy {lo:g} <= N-min <= N-max <= {hi:g}")
        if not 1 <= self.n_count <= MAX_SWEEP_POINTS:
            raise UsageError(f"N-count must be in [1, {MAX_SWEEP_POINTS}]")
        if self.n_count > 1 and self.n_min == self.n_max:
            raise UsageError("N-min equals N-max but N-count > 1")
        if not self.models:
            raise UsageError("at least one attack model is required")
        if not self.qbers:
            raise UsageError("at least one QBER is required")
        if self.output_format not in ("csv", "json", "gnuplot"):
            raise UsageError(f"unknown format {self.output_format!r}")

    def n_values(self) -> list[float]:
        if self.n_count == 1:
            return [float(self.n_min)]
        return [float(v) for v in np.geomspace(self.n_min, self.n_max, self.n_count)]

    def specs(self) -> list[OptimizationSpec]:
        return [
            OptimizationSpec(model, self.protocol, N, q, self.eps_total, self.m_grid_density, self.eps_grid_density)
            for model in self.models
            for q in self.qbers
            for N in self.n_values()
        ]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("FINIKEY_THREADS", "1")))
    except ValueError:
        return 1


def optimize_many(specs: list[OptimizationSpec], workers: int | None = None) -> list[RatePoint]:
    """Optimize every spec; results come back in input order regardless of worker count."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(specs) <= 1:
        return [optimize_rate(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(optimize_rate, specs, chunksize=1))


def point_row(point: RatePoint) -> dict:
    b = point.budget
    return {
        "protocol": point.protocol.kind.value,
        "attack": point.attack_model.value,
        "N": point.N,
        "qber": point.qber,
        "m_opt": point.m,
        "eps_pe": b.eps_pe,
        "eps_ec": b.eps_ec,
        "eps_pa": b.eps_pa,
        "eps_bar": b.eps_bar,
        "rate": point.key_rate,
    }


def render_table(rows: list[dict], output_format: str) -> str:
    out = io.StringIO()
    if output_format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([row[c] if isinstance(row[c], str) else fmt(row[c]) for c in CSV_COLUMNS])
    elif output_format == "json":
        payload = [{c: row[c] if isinstance(row[c], str) else float(fmt(row[c])) for c in CSV_COLUMNS} for row in rows]
        out.write(json.dumps(payload, indent=1))
        out.write("\n")
    else:
        numeric = [c for c in CSV_COLUMNS if c not in ("protocol", "attack", "qber")]
        blocks: dict[tuple[str, float], list[dict]] = {}
        for row in rows:
            blocks.setdefault((row["attack"], row["qber"]), []).append(row)
        out.write("# columns: " + " ".join(numeric) + "\n")
        for i, ((attack, qber), block) in enumerate(blocks.items()):
            if i:
                out.write("\n\n")
            out.write(f"# protocol={block[0]['protocol']} attack={attack} qber={fmt(qber)}\n")
            for row in block:
                out.write(" ".join(fmt(row[c]) for c in numeric) + "\n")
    return out.getvalue()


def run_sweep(request: SweepRequest, workers: int | None = None) -> str:
    points = optimize_many(request.specs(), workers)
    return render_table([point_row(p) for p in points], request.output_format)


def _describe(point: RatePoint) -> str:
    b, fb = point.budget, point.bounds
    lines = [
        f"protocol        {point.protocol.kind.value} (sifting ratio {fmt(point.protocol.sifting_ratio)}, "
        f"EC efficiency {fmt(point.protocol.ec_efficiency)})",
        f"attack          {point.attack_model.value}",
        f"N               {fmt(point.N)}",
        f"qber            {fmt(point.qber)}",
        f"m               {fmt(point.m)}",
        f"n               {fmt(point.n)}",
        f"eps_pe          {fmt(b.eps_pe)}",
        f"eps_ec          {fmt(b.eps_ec)}",
        f"eps_pa          {fmt(b.eps_pa)}",
        f"eps_bar         {fmt(b.eps_bar)}",
        f"eps_total       {fmt(point.eps_total)}",
        f"xi_pe           {fmt(fb.xi_pe)}",
        f"xi_att          {fmt(fb.xi_att)}",
        f"xi_coh          {fmt(fb.xi_coh)}",
        f"half_width      {fmt(fb.half_width)}",
        f"leak_bits       {fmt(fb.leak_bits)}",
        f"aep_per_signal  {fmt(fb.aep_bits_per_signal)}",
        "minimizer       (" + ", ".join(fmt(v) for v in point.minimizer_lambda) + ")",
        f"raw_rate        {fmt(point.rate)}",
        f"rate            {fmt(point.key_rate)}",
    ]
    lines += [f"note            {note}" for note in point.notes]
    return "\n".join(lines)


def _protocol_spec(args) -> ProtocolSpec:
    return ProtocolSpec(args.protocol, args.sifting_ratio, args.ec_efficiency)


def cmd_rate(args) -> int:
    fixed = [args.eps_pe, args.eps_ec, args.eps_pa, args.eps_bar]
    spec = _protocol_spec(args)
    if args.m is None:
        if any(v is not None for v in fixed):
            raise UsageError("--eps-* flags fix the budget and need --m as well")
        point = optimize_rate(OptimizationSpec(args.attack, spec, args.N, args.qber, args.eps_total))
    else:
        eps_pe = args.eps_pe
        if eps_pe is None and args.attack is AttackModel.COHERENT:
            eps_pe = 0.0
        if eps_pe is None or any(v is None for v in fixed[1:]):
            raise UsageError("--m needs --eps-ec, --eps-pa, --eps-bar (and --eps-pe unless coherent)")
        budget = SecurityBudget(eps_pe, args.eps_ec, args.eps_pa, args.eps_bar)
        point = rate(args.attack, spec, args.N, args.m, args.qber, budget)
    print(_describe(point))
    return EXIT_OK


def cmd_sweep(args) -> int:
    request = SweepRequest(
        protocol=_protocol_spec(args),
        models=tuple(args.models),
        qbers=tuple(args.qber),
        n_min=args.N_min,
        n_max=args.N_max,
        n_count=args.N_count,
        eps_total=args.eps_total,
        output_format=args.format,
        output_path=args.output,
    )
    if request.output_path == "-":
        sys.stdout.write(run_sweep(request))
        return EXIT_OK
    try:
        handle = open(request.output_path, "w", encoding="ascii", newline="")
    except OSError as exc:
        print(f"cannot write {request.output_path}: {exc}", file=sys.stderr)
        return EXIT_CANTCREAT
    with handle:
        handle.write(run_sweep(request))
    return EXIT_OK


def improvement_percent(r_coh: float, r_post: float) -> float | None:
    """(r_coh - r_post)/r_post in percent, or None when r_post is 0."""
    if r_post <= 0.0:
        return None
    return 100.0 * (r_coh - r_post) / r_post


def compare_rates(protocol: ProtocolSpec, N: float, qber: float, eps_total: float = DEFAULT_EPS_TOTAL,
                  workers: int | None = None) -> dict[AttackModel, RatePoint]:
    specs = [OptimizationSpec(model, protocol, N, qber, eps_total) for model in AttackModel]
    return dict(zip(AttackModel, optimize_many(specs, workers)))


def cmd_compare(args) -> int:
    points = compare_rates(_protocol_spec(args), args.N, args.qber, args.eps_total)
    r = {model: p.key_rate for model, p in points.items()}
    pct = improvement_percent(r[AttackModel.COHERENT], r[AttackModel.POSTSELECTION])
    print(f"r_coll  {fmt(r[AttackModel.COLLECTIVE])}")
    print(f"r_coh   {fmt(r[AttackModel.COHERENT])}")
    print(f"r_post  {fmt(r[AttackModel.POSTSELECTION])}")
    print("increase_coh_over_post_percent  " + ("undefined" if pct is None else f"{pct:.2f}"))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest(quick=args.quick) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finikey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p):
        p.add_argument("--protocol", type=_protocol, default=Protocol.BB84, help="bb84 or six-state")
        p.add_argument("--eps-total", type=float, default=DEFAULT_EPS_TOTAL)
        p.add_argument("--sifting-ratio", type=float, default=1.0)
        p.add_argument("--ec-efficiency", type=float, default=1.1)

    p = sub.add_parser("rate", help="key rate at one point (optimized unless --m and --eps-* are given)")
    common(p)
    p.add_argument("--attack", type=_attack, default=AttackModel.COLLECTIVE)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--qber", type=float, required=True)
    p.add_argument("--m", type=float)
    p.add_argument("--eps-pe", type=float)
    p.add_argument("--eps-ec", type=float)
    p.add_argument("--eps-pa", type=float)
    p.add_argument("--eps-bar", type=float)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("sweep", help="optimized rates over a log-spaced N grid")
    common(p)
    p.add_argument("--models", type=_models, default=list(AttackModel), help="comma list of attack models")
    p.add_argument("--qber", type=_csv_floats, required=True, help="comma list of QBER values")
    p.add_argument("--N-min", type=float, required=True)
    p.add_argument("--N-max", type=float, required=True)
    p.add_argument("--N-count", type=int, required=True)
    p.add_argument("--format", choices=("csv", "json", "gnuplot"), default="csv")
    p.add_argument("--output", default="-", help="output file, '-' for stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="collective, coherent and post-selection rates at one point")
    common(p)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--qber", type=float, required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("selftest", help="run the independent numerical checks")
    p.add_argument("--quick", action="store_true", help="smaller sample sizes")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"finikey: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, InvalidStateError) as exc:
        print(f"finikey: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        # ProtocolSpec / enum validation of user-supplied values
        print(f"finikey: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
