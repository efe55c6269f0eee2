"""Command-line entry point: ``run``, ``sweep`` and ``metrics``.

Exit status is 0 on success, 1 when a scenario aborts (the partial log is
still written) and 2 on usage or configuration errors.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config, parse_value
from .io import export_csv, export_smoothed, export_summary, read_csv, summary_json
from .metrics import metrics_for_log
from .runner import make_learner, run_scenario

log = logging.getLogger("fblquad")

EXIT_OK, EXIT_ABORT, EXIT_USAGE = 0, 1, 2


def run_to_dir(cfg, out):
    """Run one configuration and write its artifacts into ``out``.

    Returns ``(aborted_reason, summary_scalars)``.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.cfg").write_text(cfg.dump())
    model = make_learner(cfg) if cfg["compensation.type"].startswith("learned") else None
    result = run_scenario(cfg, model=model)
    export_csv(result, out / "log.csv")
    scalars = {}
    if len(result):
        summary = metrics_for_log(result)
        export_summary(summary, out / "summary.csv")
        export_smoothed(result, summary, out / "error_smoothed.csv")
        (out / "summary.json").write_text(summary_json(summary))
        scalars = summary.scalars()
    if model is not None:
        model.save(out / "model.npz")
    return result.aborted, scalars


def _sweep_job(args):
    cfg, out = args
    return run_to_dir(cfg, out)


def sweep_configs(base, param, values):
    """One config per sweep value.  ``off`` on ``controller.tau_u`` selects
    the controller without thrust-lag compensation."""
    configs = []
    for raw in values:
        value = parse_value(raw) if isinstance(raw, str) else raw
        if param == "controller.tau_u" and value is False:
            cfg = base.with_values({"controller.type": "fbl-no-delay-comp"})
            label = "off"
        else:
            cfg = base.with_values({param: value})
            label = str(raw).strip()
        configs.append((label, cfg))
    return configs


def cmd_run(args):
    cfg = load_config(args.config, args.set)
    aborted, scalars = run_to_dir(cfg, args.out)
    print(json.dumps({"out": str(args.out), "aborted": aborted, **scalars}, indent=2))
    if aborted:
        log.error("run aborted: %s", aborted)
        return EXIT_ABORT
    return EXIT_OK


def cmd_sweep(args):
    base = load_config(args.config, args.set)
    param = args.param or base["sweep.param"]
    values = args.values.split(",") if args.values else base["sweep.values"]
    if isinstance(values, (str, int, float, bool)):
        values = [values]
    if not param or not values:
        raise ConfigError("sweep needs --param and --values (or sweep.* keys in the config)")
    if param not in base.values:
        raise ConfigError(f"unknown sweep parameter {param!r}")
    out = Path(args.out)
    jobs = [(label, cfg, out / f"{param.replace('.', '_')}={label}")
            for label, cfg in sweep_configs(base, param, values)]
    payload = [(cfg, path) for _, cfg, path in jobs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_job, payload))
    else:
        results = [_sweep_job(p) for p in payload]

    out.mkdir(parents=True, exist_ok=True)
    keys = sorted({k for _, s in results for k in s})
    with (out / "sweep_summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow([param, "aborted"] + keys)
        for (label, _, _), (aborted, scalars) in zip(jobs, results):
            writer.writerow([label, aborted] + [scalars.get(k, "") for k in keys])
    for (label, _, _), (aborted, scalars) in zip(jobs, results):
        print(f"{param}={label}: mean_error_m={scalars.get('mean_error_m', float('nan')):.6g}"
              f" altitude_peak_error_m={scalars.get('altitude_peak_error_m', float('nan')):.6g}"
              + (f" ABORTED ({aborted})" if aborted else ""))
    return EXIT_ABORT if any(a for a, _ in results) else EXIT_OK


def cmd_metrics(args):
    result = read_csv(args.log)
    if not len(result):
        raise ConfigError(f"{args.log}: log has no records")
    print(summary_json(metrics_for_log(result)))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fblquad", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True,
                       help="config file or built-in scenario name")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--out", required=True, help="output directory")

    p_run = sub.add_parser("run", help="simulate one scenario")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario over a list of parameter values")
    common(p_sweep)
    p_sweep.add_argument("--param", help="dotted config key to vary")
    p_sweep.add_argument("--values", help="comma-separated values")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_sweep.set_defaults(func=cmd_sweep)

    p_met = sub.add_parser("metrics", help="recompute the summary of a logged run")
    p_met.add_argument("--log", required=True, help="log CSV written by 'run'")
    p_met.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
