"""Command-line front end.

Subcommands: ``exact``, ``moments``, ``tables``, ``estimate-root``,
``certify`` and ``verify-transforms``.  Every JSON payload carries
``schema_version`` 1 and validates against ``artifact/schemas/<command>.json``.

Exit codes: 0 success, 1 domain error, 2 verification failure (including a
certificate that is not proved or an identity that fails), 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from . import __version__
from .errors import ArtifactError, DomainError, VerificationError

SCHEMA_VERSION = 1
CACHE_ENV = "ARTIFACT_CACHE_DIR"
EXIT_OK, EXIT_DOMAIN, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 64

# fixed CSV column orders
COLUMNS = {
    "exact": ("n", "c", "residue", "count"),
    "exact-ranks": ("n", "m", "count"),
    "moments": ("ell", "n", "exact", "estimate", "leading_ratio", "estimate_ratio", "imag_residual"),
    "estimate-root": ("a", "c", "n", "estimate", "exact", "difference", "error_bound", "within_bound", "entries"),
    "certify": ("name", "status", "analytic_threshold", "checked_start", "checked_end", "failed_at", "stated_start", "stated_terms"),
    "verify-transforms": ("name", "samples", "max_residual", "tolerance", "passed"),
}
COLUMNS["tables"] = COLUMNS["moments"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    precision_bits: Optional[int]
    format: str
    cache_path: Optional[str]
    thread_count: int
    options: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.precision_bits is not None and self.precision_bits < 64:
            raise DomainError("precision must be at least 64 bits")
        if self.thread_count < 1:
            raise DomainError("thread count must be at least 1")


@dataclass
class Output:
    command: str
    payload: Dict[str, object]
    rows: List[Dict[str, object]]
    text: List[str]
    ok: bool = True


def _int_list(s: str) -> List[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from exc


def _num(mp, x, digits: int = 40) -> str:
    return mp.nstr(x, digits, strip_zeros=False) if x is not None else None


def _ratio_text(mp, x) -> str:
    # ratios this close to 1 read better as a deviation
    d = x - 1
    if d and abs(d) < mp.mpf("1e-6"):
        return f"1{'+' if d > 0 else '-'}{mp.nstr(abs(d), 3)}"
    return mp.nstr(x, 12)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--precision", "--precision-bits", dest="precision", type=int, default=None, help="working precision in bits (>= 64)")
    common.add_argument("--cache-dir", default=None, help=f"rank-table cache directory (default ${CACHE_ENV})")
    common.add_argument("--threads", type=int, default=1)

    p = _Parser(prog="artifact", description="Exact and asymptotic M2-rank statistics.")
    p.add_argument("--version", action="version", version=f"artifact {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("exact", parents=[common], help="exact N2 counts or residue vectors")
    s.add_argument("--n", type=_int_list, required=True)
    s.add_argument("--c", type=int, default=None, help="residue modulus; omit for the full rank row")

    for name in ("moments", "tables"):
        s = sub.add_parser(name, parents=[common], help="rank moments beside the asymptotic expansion")
        s.add_argument("--ell", type=_int_list, default=[1, 2, 3])
        s.add_argument("--n", type=_int_list, default=[10, 100] if name == "tables" else None, required=name == "moments")

    s = sub.add_parser("estimate-root", parents=[common], help="main-term estimate of A(a/c; n)")
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--n", type=_int_list, required=True)

    s = sub.add_parser("certify", parents=[common], help="certify an inequality among N2 residue counts")
    s.add_argument("spec", nargs="?", default=None, help="built-in name, 'table3', 'list' or a JSON file")
    s.add_argument("--replay", action="store_true", help="re-check at doubled precision")
    s.add_argument("--list", action="store_true", help="list built-in specs")

    s = sub.add_parser("verify-transforms", parents=[common], help="numeric identity report")
    s.add_argument(
        "--suite",
        choices=("identities", "r2", "mu-main", "arc", "moment-fit", "all"),
        default="all",
    )
    s.add_argument("--seed", type=int, default=None)
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    opts = {k: v for k, v in vars(ns).items() if k not in ("subcommand", "precision", "format", "cache_dir", "threads")}
    cache = ns.cache_dir if ns.cache_dir is not None else os.environ.get(CACHE_ENV)
    return RunConfig(ns.subcommand, ns.precision, ns.format, cache, ns.threads, opts)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _ctx(cfg: RunConfig, n_scale: int = 1, default: Optional[int] = None):
    from .special_functions import PrecisionContext, precision_for

    if cfg.precision_bits is not None:
        return PrecisionContext(cfg.precision_bits)
    if default is not None:
        return PrecisionContext(default)
    return precision_for(n_scale)


def _table_for(cfg: RunConfig, n_max: int):
    from .exact_engine import TABLE_CAP, cached_rank_table

    if n_max > TABLE_CAP:
        return None
    return cached_rank_table(n_max, cfg.cache_path)


def cmd_exact(cfg: RunConfig) -> Output:
    from .exact_engine import n2_mod, residue_series

    ns = cfg.options["n"]
    c = cfg.options["c"]
    if any(n < 0 for n in ns):
        raise DomainError("n must be nonnegative")
    if c is not None and c < 1:
        raise DomainError("c must be positive")
    table = _table_for(cfg, max(ns))
    rows, text, records = [], [], []
    if c is not None:
        if table is None:
            series = residue_series(c, max(ns))
            vec = {n: [series[r][n] for r in range(c)] for n in ns}
        else:
            vec = {n: [n2_mod(r, c, n, table) for r in range(c)] for n in ns}
        for n in ns:
            records.append({"n": n, "c": c, "residues": vec[n]})
            rows.extend({"n": n, "c": c, "residue": r, "count": v} for r, v in enumerate(vec[n]))
            text.append(f"N2(r,{c},{n}) for r = 0..{c - 1}: (" + ",".join(str(v) for v in vec[n]) + ")")
        return Output("exact", {"records": records}, rows, text)
    if table is None:
        raise DomainError("full rank rows need n <= 6000; pass --c for larger n")
    for n in ns:
        row = table.row(n)
        records.append({"n": n, "p2": table.p2(n), "ranks": [{"m": m, "count": v} for m, v in sorted(row.items())]})
        rows.extend({"n": n, "m": m, "count": v} for m, v in sorted(row.items()))
        text.append(f"n={n} p2={table.p2(n)}: " + " ".join(f"{m}:{v}" for m, v in sorted(row.items())))
    return Output("exact", {"records": records}, rows, text, True)


def cmd_moments(cfg: RunConfig) -> Output:
    from .moment_asymptotics import moment_report

    ells, ns = cfg.options["ell"], cfg.options["n"]
    if any(e < 1 for e in ells) or any(n < 1 for n in ns):
        raise DomainError("need ell >= 1 and n >= 1")
    ctx = _ctx(cfg, max(ns)) if cfg.precision_bits is not None else None
    table = _table_for(cfg, max(ns))
    report = moment_report(ells, ns, table, ctx)
    rows, text = [], []
    for r in report:
        mp = r.leading_ratio.context
        rows.append(
            {
                "ell": r.ell,
                "n": r.n,
                "exact": r.exact,
                "estimate": r.estimate,
                "leading_ratio": _num(mp, r.leading_ratio, 20),
                "estimate_ratio": _num(mp, r.estimate_ratio, 20),
                "imag_residual": f"{r.imag_residual:.3e}",
            }
        )
        text.append(
            f"l={r.ell} n={r.n} exact={r.exact} estimate={r.estimate} "
            f"leading/exact={mp.nstr(r.leading_ratio, 10)} estimate/exact={_ratio_text(mp, r.estimate_ratio)}"
        )
    return Output(cfg.subcommand, {"records": rows}, rows, text)


def cmd_estimate_root(cfg: RunConfig) -> Output:
    from .exact_engine import residue_series
    from .unity_asymptotics import error_bound, main_estimate

    a, c, ns = cfg.options["a"], cfg.options["c"], cfg.options["n"]
    if any(n < 2 for n in ns):
        raise DomainError("need n >= 2")
    series = residue_series(c, max(ns))
    rows, text = [], []
    ok = True
    for n in ns:
        ctx = _ctx(cfg, n)
        mp = ctx.mp
        est, cat = main_estimate(a, c, n, ctx)
        exact = mp.mpf(0)
        for r in range(c):
            exact += series[r][n] * mp.cospi(mp.mpf(2 * a * r) / c)
        diff = abs(est - exact)
        bound = error_bound(a, c, n, ctx) if math.gcd(a, c) == 1 else None
        within = None if bound is None else bool(diff <= bound)
        ok = ok and within is not False
        rows.append(
            {
                "a": a,
                "c": c,
                "n": n,
                "estimate": _num(mp, est, 30),
                "exact": _num(mp, exact, 30),
                "difference": _num(mp, diff, 10),
                "error_bound": _num(mp, bound, 10),
                "within_bound": within,
                "entries": len(cat),
                "catalog": [
                    {
                        "k": e.k,
                        "kind": e.kind,
                        "m": e.m,
                        "r": str(e.r),
                        "rate": str(e.rate) if not hasattr(e.rate, "ae") else _num(mp, e.rate, 30),
                        "amplitude_re": _num(mp, mp.mpc(e.amplitude).real, 30),
                        "amplitude_im": _num(mp, mp.mpc(e.amplitude).imag, 30),
                    }
                    for e in cat
                ],
            }
        )
        text.append(
            f"A({a}/{c}; {n}): estimate {mp.nstr(est, 20)} exact {mp.nstr(exact, 20)} "
            f"|diff| {mp.nstr(diff, 6)} bound {mp.nstr(bound, 6) if bound is not None else 'n/a'}"
        )
    return Output("estimate-root", {"records": rows}, rows, text, ok)


def _load_specs(name: Optional[str]):
    from .inequality_certifier import builtin_specs, spec_from_json

    specs = builtin_specs()
    if name is None:
        raise DomainError("name a spec (built-in name, 'table3', 'list' or a JSON file)")
    if name in specs:
        return [specs[name]]
    if name in ("table3", "list"):
        return [s for k, s in specs.items() if k.startswith(name + ":")]
    if os.path.isfile(name):
        with open(name, encoding="utf-8") as fh:
            obj = json.load(fh)
        items = obj if isinstance(obj, list) else [obj]
        return [spec_from_json(o) for o in items]
    raise DomainError(f"unknown spec {name!r}")


def cmd_certify(cfg: RunConfig) -> Output:
    from .inequality_certifier import builtin_specs, certify, replay

    if cfg.options.get("list"):
        specs = builtin_specs()
        rows = [{"name": k, "inequality": s.text} for k, s in specs.items()]
        return Output("certify", {"specs": rows}, [], [f"{r['name']}: {r['inequality']}" for r in rows])
    ctx = _ctx(cfg, default=192)
    certs = []
    for spec in _load_specs(cfg.options["spec"]):
        cert = certify(spec, ctx)
        if cfg.options.get("replay") and cert.status == "proved":
            replay(cert)
        certs.append(cert)
    records = [c.to_json() for c in certs]
    rows, text = [], []
    for r in records:
        rows.append(
            {
                "name": r["name"],
                "status": r["status"],
                "analytic_threshold": r["analytic_threshold"],
                "checked_start": r["checked_range"][0],
                "checked_end": r["checked_range"][1],
                "failed_at": r["failed_at"],
                "stated_start": r["stated_start"],
                "stated_terms": r["stated_terms"],
            }
        )
        text.append(
            f"{r['name']}: {r['inequality']} -> {r['status']}; threshold m >= {r['analytic_threshold']}, "
            f"exact check on m in [{r['checked_range'][0]}, {r['checked_range'][1]}]"
            + (f" (stated range: from {r['stated_start']}, {r['stated_terms']} terms)" if r["stated_terms"] else "")
        )
    ok = all(c.status == "proved" for c in certs)
    return Output("certify", {"certificates": records}, rows, text, ok)


def cmd_verify_transforms(cfg: RunConfig) -> Output:
    from . import mock_modular_kernel as mk
    from .special_functions import PrecisionContext

    suite = cfg.options["suite"]
    bits = cfg.precision_bits or 256
    recs = []
    extra: Dict[str, object] = {}
    if suite in ("identities", "all"):
        seed = cfg.options.get("seed")
        recs += mk.identity_suite(PrecisionContext(bits), seed=mk.IDENTITY_SEED if seed is None else seed)
    if suite in ("r2", "all"):
        recs += mk.r2_transform_suite(PrecisionContext(bits))
    if suite in ("mu-main", "all"):
        recs += mk.mu_main_term_suite(PrecisionContext(min(bits, 128)))
    if suite in ("arc", "all"):
        recs += mk.arc_integral_suite(PrecisionContext(min(bits, 128)))[0]
    if suite in ("moment-fit", "all"):
        extra["moment_remainder_fit"] = mk.moment_remainder_fit(ctx=PrecisionContext(160))
    records = [r.to_json() for r in recs]
    rows = [{k: r[k] for k in COLUMNS["verify-transforms"]} for r in records]
    text = [f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: max residual {r['max_residual']:.3e} (tol {r['tolerance']:.3e})" for r in records]
    for row in extra.get("moment_remainder_fit", []):
        text.append(f"fit l={row['ell']} h/k={row['h']}/{row['k']} z={row['z']}: C = {row['fitted_C']:.4g}")
    payload = {"precision_bits": bits, "records": records, **extra}
    return Output("verify-transforms", payload, rows, text, all(r.passed for r in recs))


COMMANDS = {
    "exact": cmd_exact,
    "moments": cmd_moments,
    "tables": cmd_moments,
    "estimate-root": cmd_estimate_root,
    "certify": cmd_certify,
    "verify-transforms": cmd_verify_transforms,
}


# ---------------------------------------------------------------------------
# formatting and entry point
# ---------------------------------------------------------------------------


def render(out: Output, fmt: str) -> str:
    if fmt == "json":
        body = {"schema_version": SCHEMA_VERSION, "command": out.command, **out.payload}
        return json.dumps(body, indent=2, sort_keys=False) + "\n"
    if fmt == "csv":
        key = out.command
        if key == "exact" and out.rows and "m" in out.rows[0]:
            key = "exact-ranks"
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS[key], lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        w.writerows(out.rows)
        return buf.getvalue()
    return "\n".join(out.text) + "\n"


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        ns = build_parser().parse_args(list(argv))
    except UsageError as exc:
        stderr.write(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        cfg = _config(ns)
        out = COMMANDS[cfg.subcommand](cfg)
        stdout.write(render(out, cfg.format))
        return EXIT_OK if out.ok else EXIT_VERIFY
    except VerificationError as exc:
        stderr.write(f"verification failure: {exc}\n")
        return EXIT_VERIFY
    except (DomainError, ArtifactError, ValueError, ZeroDivisionError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
