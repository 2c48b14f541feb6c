"""Command-line entry point: ``hwaves {simulate, converge, validate}``.

Exit status: 0 success, 1 a validation check failed, 2 usage or parameter
error, 3 numerical failure (blow-up, stalled iteration, singular solve),
4 file I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time

from .errors import HWavesError
from .harness import (
    NUMERICAL_FAILURES,
    ExperimentConfig,
    convergence_study,
    parse_config_text,
    simulate,
    write_report_csv,
    write_report_json,
    write_trajectory_csv,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3, 4
MODELS = ("linear", "quadratic", "cubic", "capillary", "internal", "ww2")


def _csv_floats(s: str):
    try:
        return tuple(float(p) for p in s.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat 'key = value' file mirroring the flags")
    p.add_argument("--example", type=int, choices=(1, 2, 3))
    p.add_argument("--grid", type=int, dest="M", help="grid size M (even)")
    p.add_argument("--steps", type=int, help="number of time steps")
    p.add_argument("--tfinal", type=float, dest="t_final")
    p.add_argument("--g", type=float)
    p.add_argument("--lambda", type=float, dest="lam", help="surface tension")
    p.add_argument("--atwood", type=float)
    p.add_argument("--n", type=int, help="odd n of Example 2")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--nu", type=int, help="ETD collocation degree")
    p.add_argument("--no-filter", dest="filter", action="store_false", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hwaves", description="Asymptotic water-wave models and Euler reference runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="one model, one eps; writes a trajectory CSV")
    _common(sim)
    sim.add_argument("--model", choices=MODELS + ("euler",), default=None)
    sim.add_argument("--eps", type=float)
    sim.add_argument("--save-every", type=int, dest="save_every", help="record every k-th step")

    conv = sub.add_parser("converge", help="eps sweep against the Euler reference; writes CSV and JSON")
    _common(conv)
    conv.add_argument("--model", action="append", choices=MODELS, dest="models", help="repeatable")
    conv.add_argument("--eps-list", type=_csv_floats, dest="eps_list")
    conv.add_argument("--ref-grid", type=int, dest="ref_M")
    conv.add_argument("--ref-steps", type=int, dest="ref_steps")
    conv.add_argument("--ref-method", choices=("direct", "gmres"), dest="ref_method")
    conv.add_argument("--workers", type=int)

    val = sub.add_parser("validate", help="run the numbered acceptance checks and print pass/fail")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--full", action="store_true", help="include the long reproduction runs (1, 2, 7, 11)")
    val.add_argument("--only", type=lambda s: tuple(int(p) for p in s.split(",")), help="comma-separated criterion numbers")
    return parser


_NOT_CONFIG = {"command", "config", "model", "eps", "full", "only"}


def _config_from_args(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    for key, val in vars(args).items():
        if key not in _NOT_CONFIG and val is not None:
            values[key] = val
    if getattr(args, "model", None):
        values["models"] = (args.model,) if args.model != "euler" else ("linear",)
    if getattr(args, "eps", None) is not None:
        values["eps_list"] = (args.eps,)
    example = values.pop("example", 1)
    return ExperimentConfig.for_example(example, **values)


def _simulate(args) -> int:
    config = _config_from_args(args)
    model = args.model or config.models[0]
    times, values = simulate(config, model=model)
    out = config.out or f"{model}_example{config.example}.csv"
    write_trajectory_csv(out, times, values)
    print(f"wrote {len(times)} rows x {values.shape[1]} points to {out}")
    return EXIT_OK


def _converge(args) -> int:
    config = _config_from_args(args)

    def progress(who, eps, sec):
        print(f"  {who:>9s} eps={eps:<8g} {sec:7.1f} s", file=sys.stderr, flush=True)

    t0 = time.perf_counter()
    report = convergence_study(config, progress=progress)
    stem = config.out or f"converge_example{config.example}"
    stem = stem[:-5] if stem.endswith(".json") else stem[:-4] if stem.endswith(".csv") else stem
    write_report_csv(stem + ".csv", report)
    write_report_json(stem + ".json", report)
    for name, mc in report.models.items():
        slope = f"{mc.slope:.3f}" if mc.slope_defined else "undefined"
        line = f"{name:>10s}: slope {slope}, prefactor {mc.fixed_prefactor:.4g} (rms {mc.fixed_prefactor_rms:.4g})"
        if mc.flagged:
            line += f", {len(mc.flagged)} run(s) flagged"
        print(line)
    print(f"wrote {stem}.csv and {stem}.json in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK


def _validate(args) -> int:
    from .validation import CRITERIA, FAST

    numbers = args.only or (tuple(sorted(CRITERIA)) if args.full else FAST)
    failed = 0
    for n in numbers:
        if n not in CRITERIA:
            print(f"unknown criterion {n}", file=sys.stderr)
            return EXIT_USAGE
        kwargs = {"seed": args.seed} if n == 4 else {}
        result = CRITERIA[n](**kwargs)
        print(result.line(), flush=True)
        failed += not result.passed
    print(f"{len(numbers) - failed}/{len(numbers)} criteria passed")
    return EXIT_OK if failed == 0 else EXIT_CHECK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    handler = {"simulate": _simulate, "converge": _converge, "validate": _validate}[args.command]
    try:
        return handler(args)
    except NUMERICAL_FAILURES as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HWavesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
