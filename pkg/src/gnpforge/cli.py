"""Command-line front end.

Every subcommand prints one JSON report on stdout (or CSV rows for sweeps with
``--format csv``) and a short summary on stderr.  Exit codes: 0 no findings,
1 findings, 2 invalid input, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from . import __version__
from .cyclotomic import render_rational, render_value
from .errors import BudgetExceeded, GnpError, InputError
from .lfunction import (
    DEFAULT_POINT_BUDGET,
    DEFAULT_SCAN_CAP,
    DEFAULT_TUPLE_CAP,
    l_polynomial,
    newton_polygon,
    parse_poly,
    supersingular_scan,
    verify_prediction,
)
from .modular import (
    DEFAULT_LENGTH_CAP,
    DEFAULT_NODE_BUDGET,
    ExponentSet,
    density,
    enumerate_minimal,
    orbit_catalog,
)

log = logging.getLogger("gnpforge")

EXIT_OK, EXIT_FINDINGS, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
CONFIG_ENV = "GNPFORGE_CONFIG"


@dataclass
class RunConfig:
    node_budget: int = DEFAULT_NODE_BUDGET
    point_budget: int = DEFAULT_POINT_BUDGET
    tuple_cap: int = DEFAULT_TUPLE_CAP
    scan_cap: int = DEFAULT_SCAN_CAP
    length_cap: int = DEFAULT_LENGTH_CAP
    seed: int = 0
    format: str = "json"
    cache_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        for name in ("node_budget", "point_budget", "tuple_cap", "scan_cap", "length_cap", "threads"):
            if int(getattr(self, name)) <= 0:
                raise InputError(f"config field {name} must be positive")
        if self.format not in ("json", "csv"):
            raise InputError("format must be json or csv")

    @classmethod
    def load(cls, path: str | None, overrides: dict[str, Any]) -> "RunConfig":
        data: dict[str, Any] = {}
        path = path or os.environ.get(CONFIG_ENV)
        if path:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read config {path}: {exc}") from exc
            if not isinstance(data, dict):
                raise InputError("config file must hold a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def echo(self) -> dict:
        return dataclasses.asdict(self)


def _exponents(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse exponent list {text!r}") from exc
    if not out:
        raise InputError("empty exponent list")
    return out


# --------------------------------------------------------------------------
# command handlers: each returns (payload, findings, csv rows or None)
# --------------------------------------------------------------------------

Payload = tuple[dict, list[str], list[dict] | None]


def cmd_density(a, cfg: RunConfig) -> Payload:
    D = ExponentSet.of(a.p, _exponents(a.exponents))
    rep = density(D, a.nmax)
    rows = [{"n": n, "s": s, "ratio": render_rational(Fraction(s, (D.p - 1) * n))} for n, s in rep.table.items()]
    return rep.to_json(), [], rows


def cmd_minimal(a, cfg: RunConfig) -> Payload:
    D = ExponentSet.of(a.p, _exponents(a.exponents))
    if a.length is not None:
        ws = enumerate_minimal(D, a.length, cfg.node_budget)
        return {"p": D.p, "exponents": list(D.exponents), "n": a.length,
                "minimal": [w.to_json() for w in ws]}, [], None
    cat = orbit_catalog(D, cfg.length_cap, cfg.node_budget)
    payload = {"p": D.p, "exponents": list(D.exponents), **cat.to_json()}
    return payload, [], None


def cmd_predict(a, cfg: RunConfig) -> Payload:
    from .hasse import predict

    D = ExponentSet.of(a.p, _exponents(a.exponents))
    pred = predict(D, cfg.length_cap, cfg.node_budget)
    return pred.to_json(), [], None


def cmd_oracle(a, cfg: RunConfig) -> Payload:
    f = parse_poly(a.poly, a.p, a.m)
    L = l_polynomial(f, cfg.point_budget)
    NP = newton_polygon(L)
    fv = NP.first_vertex() if len(NP.vertices) > 1 else None
    findings = []
    payload = {
        "p": f.p, "m": f.m, "poly": f.render(),
        "l_coeffs": [c.to_json() for c in L.coeffs],
        "sums": [s.to_json() for s in L.sums],
        "valuations": [render_value(v) for v in L.valuations()],
        "polygon": NP.to_json(),
        "first_vertex": None if fv is None else [fv[0], render_rational(fv[1])],
        "first_slope": None if fv is None else render_rational(fv[1] / fv[0]),
    }
    if fv is not None and f.d0 >= 2:
        delta = density(f.support).delta
        if fv[1] / fv[0] < delta:
            findings.append(f"first slope {fv[1] / fv[0]} is below the density {delta}")
    return payload, findings, None


def cmd_verify(a, cfg: RunConfig) -> Payload:
    D = ExponentSet.of(a.p, _exponents(a.exponents))
    mode = "sample" if a.samples is not None else "exhaustive"
    seed = a.seed if a.seed is not None else cfg.seed
    rep = verify_prediction(D, a.m, mode, samples=a.samples or 0, seed=seed,
                            point_budget=cfg.point_budget, tuple_cap=cfg.tuple_cap,
                            threads=cfg.threads, keep_records=cfg.format == "csv")
    rows = [r.to_json() for r in rep.records] if cfg.format == "csv" else None
    if rows:
        for r in rows:
            r["vertex"] = f"{r['vertex'][0]};{r['vertex'][1]}"
            r["support"] = ";".join(map(str, r["support"]))
            sv = r["support_vertex"]
            r["support_vertex"] = "" if sv is None else f"{sv[0]};{sv[1]}"
    return rep.to_json(), rep.findings, rows


def _family_of(p: int, d0: int) -> tuple[str, int] | None:
    n = 1
    while p ** n - 1 <= d0:
        if p ** n - 1 == d0:
            return "p^n-1", n
        if 2 * p ** n - 2 == d0:
            return "2p^n-2", n
        n += 1
    return None


def cmd_scan(a, cfg: RunConfig) -> Payload:
    fam = _family_of(a.p, a.d0)
    if fam is None:
        raise InputError(f"d0={a.d0} is neither p^n-1 nor 2p^n-2 for p={a.p}")
    rep = supersingular_scan(a.p, a.d0, a.m, cfg.point_budget, cfg.scan_cap)
    kind, n = fam
    expected = Fraction(1, n * (a.p - 1))
    excluded = n * (a.p - 1) <= 2
    payload = {**rep.to_json(), "family": kind, "n": n,
               "expected_first_slope": render_rational(expected), "excluded": excluded}
    findings = []
    others = {s: c for s, c in rep.histogram.items() if s != render_rational(expected)}
    if others:
        findings.append(f"first slopes differ from {render_rational(expected)}: {others}")
    if rep.pure_half and not excluded:
        findings.append(f"{rep.pure_half} polygons of pure slope 1/2")
    rows = [{"first_slope": s, "count": c} for s, c in sorted(rep.histogram.items())]
    return payload, findings, rows


def cmd_dwork(a, cfg: RunConfig) -> Payload:
    from .dwork import cyclic_minor_check, decomposition_check, injections, minor_congruence_check, small_subsets
    from .hasse import predict

    D = ExponentSet.of(a.p, _exponents(a.exponents))
    f = parse_poly(a.poly, a.p, 1)
    pred = predict(D, cfg.length_cap, cfg.node_budget)
    main = minor_congruence_check(D, f, a.precision, prediction=pred)
    findings = list(main.findings) if main.agree is False else []
    universe = sorted(set(pred.sigma) | set(range(1, max(pred.sigma or (1,)) + 2)))
    cyc = [cyclic_minor_check(D, f, th, a.precision, prediction=pred) for th in injections(universe, 3)]
    dec = [decomposition_check(D, f, F, a.precision, prediction=pred) for F in small_subsets(universe, 3)]
    findings += [f"cyclic minor bound fails for theta={c.theta}" for c in cyc if not c.passed]
    findings += [f"cyclic decomposition disagrees on F={d.F}" for d in dec if not d.agree]
    findings += [f"valuation bound fails on F={d.F}" for d in dec if d.supp2_pass is False]
    payload = {"congruence": main.to_json(),
               "cyclic_minors": [c.to_json() for c in cyc],
               "decompositions": [d.to_json() for d in dec]}
    return payload, findings, None


COMMANDS: dict[str, Callable[[Any, RunConfig], Payload]] = {
    "density": cmd_density,
    "minimal": cmd_minimal,
    "predict": cmd_predict,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "scan-ss": cmd_scan,
    "dwork-check": cmd_dwork,
}
CSV_COMMANDS = {"density", "verify", "scan-ss"}


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--cache-dir", dest="cache_dir", default=None)
    common.add_argument("--config", default=None, help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--node-budget", dest="node_budget", type=int, default=None)
    common.add_argument("--point-budget", dest="point_budget", type=int, default=None)
    common.add_argument("--tuple-cap", dest="tuple_cap", type=int, default=None)
    common.add_argument("--scan-cap", dest="scan_cap", type=int, default=None)
    common.add_argument("--length-cap", dest="length_cap", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="gnpforge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("density", "p-density table of an exponent set")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--exponents", required=True)
    p.add_argument("--nmax", type=int, default=None)

    p = add("minimal", "minimal irreducible solutions and Sigma")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--exponents", required=True)
    p.add_argument("--length", type=int, default=None)

    p = add("predict", "Hasse polynomial and predicted first vertex")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--exponents", required=True)

    p = add("oracle", "exact L-function and Newton polygon of one polynomial")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--poly", required=True)

    p = add("verify", "sweep polynomials and compare with the prediction")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--exponents", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--exhaustive", action="store_true")
    g.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=None)

    p = add("scan-ss", "first-slope histogram over all polynomials of degree d0")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d0", type=int, required=True)
    p.add_argument("--m", type=int, default=1)

    p = add("dwork-check", "pi-adic congruences on the truncated Dwork matrix")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--exponents", required=True)
    p.add_argument("--poly", required=True)
    p.add_argument("--precision", type=int, default=None)
    return ap


def _cache_key(command: str, args: dict, cfg: RunConfig) -> str:
    conf = {k: v for k, v in cfg.echo().items() if k not in ("cache_dir", "threads")}
    blob = json.dumps({"command": command, "args": args, "config": conf, "version": __version__},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _emit_csv(rows: list[dict], out) -> None:
    if not rows:
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, stream=stderr)
    cmd_args = {k: v for k, v in vars(a).items()
                if k not in ("format", "threads", "cache_dir", "config", "node_budget", "point_budget",
                             "tuple_cap", "scan_cap", "length_cap", "verbose", "command")}
    envelope: dict[str, Any] = {"command": a.command, "args": cmd_args}
    try:
        cfg = RunConfig.load(a.config, {
            "format": a.format, "threads": a.threads, "cache_dir": a.cache_dir,
            "node_budget": a.node_budget, "point_budget": a.point_budget, "tuple_cap": a.tuple_cap,
            "scan_cap": a.scan_cap, "length_cap": a.length_cap,
        })
        envelope["config"] = cfg.echo()
        if cfg.format == "csv" and a.command not in CSV_COMMANDS:
            raise InputError(f"--format csv applies to {sorted(CSV_COMMANDS)} only")
        cache_file = None
        cached = None
        if cfg.cache_dir:
            cache_file = Path(cfg.cache_dir) / f"{_cache_key(a.command, cmd_args, cfg)}.json"
            if cache_file.exists():
                cached = json.loads(cache_file.read_text())
        if cached is not None:
            payload, findings, rows = cached["payload"], cached["findings"], cached["rows"]
        else:
            payload, findings, rows = COMMANDS[a.command](a, cfg)
            if cache_file is not None:
                cache_file.parent.mkdir(parents=True, exist_ok=True)
                cache_file.write_text(json.dumps({"payload": payload, "findings": findings, "rows": rows}))
    except BudgetExceeded as exc:
        return _fail(envelope, exc, EXIT_BUDGET, stdout, stderr)
    except (InputError, ValueError) as exc:
        return _fail(envelope, exc, EXIT_INPUT, stdout, stderr)
    except GnpError as exc:
        return _fail(envelope, exc, EXIT_INPUT, stdout, stderr)

    envelope["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    envelope["payload"] = payload
    envelope["findings"] = findings
    if cfg.format == "csv":
        buf = io.StringIO()
        _emit_csv(rows or [], buf)
        stdout.write(buf.getvalue())
    else:
        stdout.write(json.dumps(envelope, indent=2) + "\n")
    status = "findings" if findings else "ok"
    print(f"gnpforge {a.command}: {status}" + (f" ({len(findings)} findings)" if findings else ""), file=stderr)
    for line in findings[:10]:
        print(f"  - {line}", file=stderr)
    return EXIT_FINDINGS if findings else EXIT_OK


def _fail(envelope: dict, exc: Exception, code: int, stdout, stderr) -> int:
    envelope["error"] = {"type": type(exc).__name__, "message": str(exc)}
    envelope["exit_code"] = code
    stdout.write(json.dumps(envelope, indent=2) + "\n")
    print(f"gnpforge {envelope['command']}: error: {exc}", file=stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
