"""Command-line front end.

Examples::

    epr-sfg point --gamma3 1 --rho1 0.1 --rho3 0.1 --pump 1 --r 0.6 --omega 0
    epr-sfg spectrum --r 0.6 1 2 --out fig2.csv
    epr-sfg pump-sweep --gamma3 0.6 1 1.4 --r 2 --out fig3.csv
    epr-sfg verify --draws 1000 --seed 0
    epr-sfg montecarlo --r 0.6 --duration 2e5 --out mc.csv

Parameter precedence: command-line flags, then ``--config`` keys, then the
command defaults.  A run manifest written next to ``--out`` is itself a
valid ``--config`` file, so any run can be repeated from it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import InsufficientDataError, SimulationDivergedError, SingularSystemError
from .langevin import SimConfig, simulate_spectrum, simulate_traces
from .sweeps import (
    POINT_HEADER,
    SweepSpec,
    Table,
    fmt,
    point_row,
    pump_sweep_table,
    spectrum_table,
    squeeze_sweep_table,
)
from .transfer import SfgParams
from .verify import run_batteries

log = logging.getLogger("epr_sfg")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3

_STANDARD = {"gamma3": [1.0], "rho1": 0.1, "rho3": 0.1, "pump": 1.0, "r": [0.6], "omega": 0.0}

DEFAULTS = {
    "point": dict(_STANDARD),
    "spectrum": {**_STANDARD, "r": [0.6, 1.0, 2.0], "start": 0.0, "stop": 3.0, "step": 0.01},
    "pump-sweep": {**_STANDARD, "gamma3": [0.6, 1.0, 1.4], "r": [2.0],
                   "start": 0.01, "stop": 3.0, "step": 0.01},
    "squeeze-sweep": {**_STANDARD, "start": 0.0, "stop": 3.0, "step": 0.01},
    "verify": {"draws": 1000, "seed": 0, "inject_fault": False},
    "montecarlo": {**_STANDARD, "seed": 20061016, "dt": 0.005, "duration": 2e5,
                   "segment": 16384, "overlap": 0.5, "omegas": [0.0, 0.5, 1.0, 1.5, 2.0],
                   "dump_trace": None, "dump_samples": 10000},
}

_LISTS = {"r", "gamma3", "omegas"}
_INTS = {"seed", "draws", "segment", "dump_samples"}
_BOOLS = {"inject_fault"}
_STRS = {"dump_trace"}
_NOT_PARAMS = {"command", "out", "config", "json", "verbose"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=None)
    common.add_argument("--gamma3", type=float, nargs="+", help="gamma3/gamma1")
    common.add_argument("--rho1", type=float, help="rho1/gamma1")
    common.add_argument("--rho3", type=float, help="rho3/gamma1")
    common.add_argument("--pump", type=float, help="chi E / gamma1")
    common.add_argument("--r", type=float, nargs="+", help="squeeze factor(s)")
    common.add_argument("--omega", type=float, help="normalised analysis frequency")
    common.add_argument("--out", help="output CSV (a run manifest is written alongside)")
    common.add_argument("--config", help="key=value or JSON config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--json", action="store_true", default=None, help="JSON on stdout")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    grid = argparse.ArgumentParser(add_help=False, argument_default=None)
    grid.add_argument("--start", type=float)
    grid.add_argument("--stop", type=float)
    grid.add_argument("--step", type=float)

    ap = _Parser(prog="epr-sfg", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("point", parents=[common], help="evaluate one operating point")
    sub.add_parser("spectrum", parents=[common, grid], help="S_min versus Omega")
    sub.add_parser("pump-sweep", parents=[common, grid], help="S_min versus pump")
    sub.add_parser("squeeze-sweep", parents=[common, grid], help="S_min versus r")
    v = sub.add_parser("verify", parents=[common], help="oracle batteries")
    v.add_argument("--draws", type=int)
    v.add_argument("--inject-fault", action="store_true", default=None,
                   help="perturb one coefficient to check the harness fails")
    mc = sub.add_parser("montecarlo", parents=[common], help="Langevin simulation")
    mc.add_argument("--dt", type=float)
    mc.add_argument("--duration", type=float)
    mc.add_argument("--segment", type=int, help="Welch segment length")
    mc.add_argument("--overlap", type=float, help="Welch overlap fraction")
    mc.add_argument("--omegas", type=float, nargs="+", help="frequencies to report")
    mc.add_argument("--dump-trace", help="write t,Xa2,Ya2,Xb3,Yb3 samples to this CSV")
    mc.add_argument("--dump-samples", type=int)
    return ap


def _coerce(key: str, value):
    if key in _LISTS:
        if isinstance(value, str):
            value = value.replace(",", " ").split()
        if not isinstance(value, (list, tuple)):
            value = [value]
        return [float(v) for v in value]
    if key in _BOOLS:
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if key in _INTS:
        return int(float(value))
    if key in _STRS:
        return None if value in (None, "") else str(value)
    return float(value)


def load_config(path: str) -> dict:
    """Read a flat ``key=value`` file or a JSON object (a run manifest also works)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            data[key.strip()] = value.strip()
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be an object")
    if isinstance(data.get("params"), dict):
        data = data["params"]
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags for ``args.command``."""
    defaults = DEFAULTS[args.command]
    params = dict(defaults)
    if args.config:
        for key, value in load_config(args.config).items():
            if key in defaults:
                params[key] = _coerce(key, value)
            elif key not in _NOT_PARAMS:
                log.warning("ignoring unknown config key %r", key)
    for key, value in vars(args).items():
        if key in defaults and value is not None:
            params[key] = _coerce(key, value)
    return params


def _single(params: dict, key: str) -> float:
    values = params[key]
    if len(values) != 1:
        raise UsageError(f"--{key} takes a single value for this command")
    return values[0]


def table_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _emit(table: Table, args, params: dict, extra: dict | None = None) -> None:
    text = table_csv(table)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        write_manifest(args.out, args.command, params, [args.out], extra)
        log.info("wrote %s", args.out)
    elif not args.json:
        sys.stdout.write(text)


def write_manifest(out: str, command: str, params: dict, outputs: list[str],
                   extra: dict | None = None) -> Path:
    path = Path(f"{out}.manifest.json")
    manifest = {
        "tool": "epr-sfg",
        "version": __version__,
        "command": command,
        "params": params,
        "seed": params.get("seed"),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": [str(o) for o in outputs] + [str(path)],
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _spec(axis: str, params: dict) -> SweepSpec:
    return SweepSpec(axis, params["start"], params["stop"], params["step"])


def cmd_point(args, params) -> int:
    g3, r = _single(params, "gamma3"), _single(params, "r")
    row = point_row(g3, params["rho1"], params["rho3"], params["pump"], r, params["omega"])
    result = dict(zip(POINT_HEADER, row))
    if args.json:
        print(json.dumps(result))
    else:
        for key in POINT_HEADER[6:]:
            print(f"{key:12s} {fmt(result[key])}")
    if args.out:
        _emit(Table(POINT_HEADER, [row]), args, params)
    return EXIT_OK


def cmd_spectrum(args, params) -> int:
    table = spectrum_table(_spec("omega", params), params["r"], _single(params, "gamma3"),
                           params["rho1"], params["rho3"], params["pump"])
    _emit(table, args, params)
    if args.json:
        print(json.dumps({"header": table.header, "rows": table.rows}))
    return EXIT_OK


def cmd_pump_sweep(args, params) -> int:
    table = pump_sweep_table(_spec("pump", params), params["gamma3"], params["r"],
                             params["rho1"], params["rho3"], params["omega"])
    _emit(table, args, params, {"summary": table.summary})
    if args.json:
        print(json.dumps({"summary": table.summary}))
    else:
        for name, info in table.summary.items():
            print(f"# {name}: argmin pump {fmt(info['argmin_pump'])}, "
                  f"min {fmt(info['min_smin'])}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_squeeze_sweep(args, params) -> int:
    table = squeeze_sweep_table(_spec("squeeze", params), _single(params, "gamma3"),
                                params["rho1"], params["rho3"], params["pump"], params["omega"])
    _emit(table, args, params, {"summary": table.summary})
    msg = f"# large-r asymptote 1 - eta = {fmt(table.summary['asymptote'])}"
    if args.json:
        print(json.dumps({"summary": table.summary}))
    else:
        print(msg, file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_verify(args, params) -> int:
    results = run_batteries(params["draws"], params["seed"], params["inject_fault"])
    ok = all(b.passed for b in results)
    verdict = {"batteries": [b.to_json() for b in results], "pass": ok}
    if args.json:
        print(json.dumps(verdict))
    else:
        for b in results:
            status = "PASS" if b.passed else "FAIL"
            print(f"{status}  {b.battery:24s} max_error={b.max_error:.3e}  tol={b.tolerance:.0e}")
            if not b.passed:
                print(f"      offending draw: {json.dumps(b.worst)}")
    if args.out:
        Path(args.out).write_text(json.dumps(verdict, indent=2) + "\n", encoding="utf-8")
        write_manifest(args.out, args.command, params, [args.out])
    return EXIT_OK if ok else EXIT_VERIFY


MC_HEADER = ("omega", "analytic", "simulated", "stderr", "z", "within_3se",
             "analytic_rotation", "simulated_rotation", "stderr_rotation", "output_psd")


def cmd_montecarlo(args, params) -> int:
    p = SfgParams.from_ratios(_single(params, "gamma3"), params["rho1"], params["rho3"],
                              params["pump"])
    r = _single(params, "r")
    cfg = SimConfig(params["dt"], params["duration"], params["seed"], params["segment"],
                    params["overlap"])
    res = simulate_spectrum(p, r, cfg, params["omegas"])
    z, ok = res.z_scores(), res.within(3.0)
    rows = [
        (res.omega[i], res.analytic[i], res.simulated[i], res.stderr[i], z[i], ok[i],
         res.analytic_rotation[i], res.simulated_rotation[i], res.stderr_rotation[i],
         res.output_psd[i])
        for i in range(len(res.omega))
    ]
    table = Table(MC_HEADER, rows)
    outputs = []
    if params["dump_trace"]:
        n = min(params["dump_samples"], cfg.n_steps)
        simulate_traces(p, r, cfg, n).to_csv(params["dump_trace"])
        outputs.append(params["dump_trace"])
    verdict = {"n_segments": res.n_segments, "pass": bool(ok.all())}
    if args.out:
        Path(args.out).write_text(table_csv(table), encoding="utf-8", newline="\n")
        write_manifest(args.out, args.command, params, [args.out] + outputs, {"verdict": verdict})
    if args.json:
        print(json.dumps({"header": MC_HEADER, "rows": [[float(v) for v in row] for row in rows],
                          **verdict}))
    else:
        if not args.out:
            sys.stdout.write(table_csv(table))
        print(f"# {res.n_segments} Welch segments; "
              f"{int(ok.sum())}/{len(ok)} frequencies within 3 standard errors",
              file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK if ok.all() else EXIT_VERIFY


COMMANDS = {
    "point": cmd_point,
    "spectrum": cmd_spectrum,
    "pump-sweep": cmd_pump_sweep,
    "squeeze-sweep": cmd_squeeze_sweep,
    "verify": cmd_verify,
    "montecarlo": cmd_montecarlo,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        params = resolve(args)
        return COMMANDS[args.command](args, params)
    except (UsageError, ValueError, InsufficientDataError, OSError) as exc:
        print(f"epr-sfg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularSystemError, SimulationDivergedError) as exc:
        print(f"epr-sfg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
