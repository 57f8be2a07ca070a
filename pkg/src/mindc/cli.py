"""Command line driver: solve single instances, run setting grids, build profiles.

Examples::

    mindc solve --problem kissing --n 6 --dim 2 --heur 0 --pair 0 --rotsym 1
    mindc suite --problem pack-sphere --n 2 3 4 --dim 2 --out runs.csv
    mindc profile runs.csv --metric time --out profile.csv
    mindc build --problem pack-box --n 4 --dim 2 --out box4.json
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .engine import SETTING_NAMES, Settings, Status, solve
from .instances import ProblemKind, ProblemSpec, load_instance, save_instance

log = logging.getLogger("mindc")

CSV_HEADER = ["instance", "setting", "status", "primal", "dual", "gap", "nodes", "time_s", "cuts",
              "red_prop1", "red_locatelli", "red_pair_geo", "red_pair_bisect"]
SOLVED = {Status.OPTIMAL.value, Status.GAP_REACHED.value, Status.INFEASIBLE.value}


@dataclass
class RunRecord:
    instance_name: str
    setting_name: str
    status: str
    primal: float | None
    dual: float
    gap: float
    nodes: int
    time_s: float
    cuts: int
    reductions: dict

    def row(self) -> list:
        def num(v):
            return "" if v is None else repr(float(v))
        r = self.reductions
        return [self.instance_name, self.setting_name, self.status, num(self.primal), num(self.dual),
                num(self.gap), self.nodes, f"{self.time_s:.3f}", self.cuts,
                r.get("prop1", 0), r.get("locatelli", 0), r.get("pair_geo", 0), r.get("pair_bisect", 0)]


def setting_label(settings: Settings, with_rotsym: bool) -> str:
    return f"{settings.name}_rotsym_{int(settings.rotsym)}" if with_rotsym else settings.name


def _run_one(job):
    instance, settings, label = job
    try:
        res = solve(instance, settings)
    except Exception as exc:  # recorded, not fatal
        log.error("run %s / %s failed: %s", instance.name, label, exc)
        return RunRecord(instance.name, label, f"Error:{type(exc).__name__}", None, math.nan,
                         math.nan, 0, 0.0, 0, {}), False
    return RunRecord(instance.name, label, str(res.status), res.incumbent_value, res.dual_bound,
                     res.gap, res.nodes, res.time, res.cuts_added, res.reductions_by_algorithm), True


def run_suite(instances, settings_list, output_path, jobs: int = 1, label_rotsym: bool = False) -> bool:
    """Solve every (instance, setting) pair and write one CSV row each.

    Returns True iff no run raised an internal error.
    """
    work = [(inst, s, setting_label(s, label_rotsym)) for inst in instances for s in settings_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    with open(output_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec, _ in results:
            writer.writerow(rec.row())
    return all(ok for _, ok in results)


def _read_runs(csv_path):
    with open(csv_path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _ratio_curves(values: dict, instances: list, settings: list) -> list[tuple[str, float, float]]:
    """Performance-profile curves: for each setting, fraction of instances within ratio tau of the best."""
    rows = []
    ratios = {s: [] for s in settings}
    for inst in instances:
        best = min(values[(inst, s)] for s in settings)
        for s in settings:
            v = values[(inst, s)]
            if math.isinf(v):
                ratios[s].append(math.inf)
            elif best <= 0:
                ratios[s].append(1.0 if v <= 0 else math.inf)
            else:
                ratios[s].append(v / best)
    taus = sorted({r for rs in ratios.values() for r in rs if math.isfinite(r)})
    count = len(instances)
    for s in settings:
        rs = ratios[s]
        for tau in taus:
            rows.append((s, tau, sum(r <= tau for r in rs) / count))
    return rows


def profile_data(csv_path, metric: str, output_path) -> list:
    """Performance-profile curves (setting, ratio, fraction) written as CSV.

    ``time`` uses instances solved by at least one setting (unsolved runs count
    as infinitely slow); ``gap`` uses instances no setting solved.
    """
    if metric not in ("time", "gap"):
        raise ValueError("metric must be 'time' or 'gap'")
    runs = _read_runs(csv_path)
    settings = sorted({r["setting"] for r in runs})
    by_inst = {}
    for r in runs:
        by_inst.setdefault(r["instance"], {})[r["setting"]] = r
    complete = {i: rs for i, rs in by_inst.items() if set(rs) == set(settings)}

    def solved(r):
        return r["status"] in SOLVED

    values = {}
    if metric == "time":
        chosen = [i for i, rs in complete.items() if any(solved(r) for r in rs.values())]
        for i in chosen:
            for s, r in complete[i].items():
                values[(i, s)] = float(r["time_s"]) if solved(r) else math.inf
    else:
        chosen = [i for i, rs in complete.items() if not any(solved(r) for r in rs.values())]
        for i in chosen:
            for s, r in complete[i].items():
                g = r["gap"]
                values[(i, s)] = float(g) if g not in ("", "nan") else math.inf
    chosen.sort()
    rows = _ratio_curves(values, chosen, settings) if chosen else []
    if not chosen:
        log.warning("no instances pass the %s filter; profile is empty", metric)
    with open(output_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting", "ratio", "fraction"])
        for s, tau, frac in rows:
            writer.writerow([s, repr(tau), repr(frac)])
    return rows


def shifted_geometric_mean(values, shift: float = 1.0) -> float:
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return math.nan
    return math.exp(sum(math.log(v + shift) for v in vals) / len(vals)) - shift


# --------------------------------------------------------------------------
# argument handling

def _add_problem_args(p, many: bool):
    p.add_argument("--problem", choices=[k.value for k in ProblemKind])
    p.add_argument("--n", type=int, nargs="+" if many else None, default=None)
    p.add_argument("--dim", type=int, default=2, choices=(2, 3))
    p.add_argument("--instance", nargs="+" if many else None, default=None,
                   help="instance JSON file(s) instead of --problem")


def _add_setting_args(p):
    p.add_argument("--gap", type=float, default=0.005)
    p.add_argument("--time-limit", type=float, default=7200.0)
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cutfreq", type=int, default=0, choices=(0, 1, 10))


def _instances(args, many: bool):
    if args.instance:
        paths = args.instance if many else [args.instance]
        return [load_instance(p) for p in paths]
    if not args.problem or args.n is None:
        raise SystemExit("either --instance or --problem with --n is required")
    ns = args.n if many else [args.n]
    return [ProblemSpec(args.problem, n, args.dim).build() for n in ns]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mindc", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    _add_problem_args(p, many=False)
    p.add_argument("--heur", choices=("0", "1", "none"), default="1")
    p.add_argument("--pair", type=int, choices=(0, 1), default=0)
    p.add_argument("--rotsym", type=int, choices=(0, 1), default=0)
    _add_setting_args(p)
    p.add_argument("--out", help="append the run as a CSV row to this file")

    p = sub.add_parser("suite", help="run the setting grid over several instances")
    _add_problem_args(p, many=True)
    p.add_argument("--settings", nargs="+", default=list(SETTING_NAMES), choices=SETTING_NAMES)
    p.add_argument("--rotsym", type=int, nargs="+", choices=(0, 1), default=[0],
                   help="rotation cut switch values to cross with the settings")
    _add_setting_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("profile", help="performance-profile curves from a suite CSV")
    p.add_argument("csv")
    p.add_argument("--metric", choices=("time", "gap"), default="time")
    p.add_argument("--out", required=True)

    p = sub.add_parser("build", help="write an instance JSON file")
    _add_problem_args(p, many=False)
    p.add_argument("--out", required=True)
    return parser


def _settings(args, name, rotsym):
    return Settings.from_name(name, rotsym=bool(rotsym), cutfreq=args.cutfreq, gap=args.gap,
                              time_limit=args.time_limit, node_limit=args.node_limit, seed=args.seed)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "solve":
        heur = None if args.heur == "none" else int(args.heur)
        name = "default" if heur is None else f"heur_{heur}_pair_{args.pair}"
        inst = _instances(args, many=False)[0]
        rec, ok = _run_one((inst, _settings(args, name, args.rotsym), name))
        print(" ".join(f"{k}={v}" for k, v in zip(CSV_HEADER, rec.row())))
        if args.out:
            new = not os.path.exists(args.out)
            with open(args.out, "a", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                if new:
                    writer.writerow(CSV_HEADER)
                writer.writerow(rec.row())
        return 0 if ok else 1
    if args.command == "suite":
        insts = _instances(args, many=True)
        settings = [_settings(args, name, rs) for rs in args.rotsym for name in args.settings]
        ok = run_suite(insts, settings, args.out, jobs=args.jobs, label_rotsym=len(args.rotsym) > 1)
        return 0 if ok else 1
    if args.command == "profile":
        profile_data(args.csv, args.metric, args.out)
        return 0
    if args.command == "build":
        save_instance(_instances(args, many=False)[0], args.out)
        return 0
    return 2  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
