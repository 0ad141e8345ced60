"""Batch front end: subcommands wiring configs to the library modules.

Every run emits a report plus a manifest (subcommand, config echo, seed,
wall time, version, config hash) so outputs are self-describing.  JSON goes
to stdout by default; --out picks CSV or JSON by file extension.  CSV files
carry the manifest in '#'-prefixed comment lines above the header row.

Exit codes: 0 success, 2 configuration error, 3 internal check failure
(an oracle disagreement; never silently swallowed).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, is_dataclass
from fractions import Fraction
from importlib import metadata
from pathlib import Path
from typing import Optional

from . import arithmetic
from . import census
from . import curve_core as cc
from . import local_density
from . import lp_bounds
from . import real_density

try:
    _VERSION = metadata.version("artifact")
except metadata.PackageNotFoundError:  # running from a source tree
    _VERSION = "0.0.0+src"


class ConfigError(ValueError):
    pass


class OracleMismatch(AssertionError):
    """A cross-check between two independent computations failed."""


# ---------------------------------------------------------------------------
# Manifest and serialization.
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: Optional[int]
    wall_time_s: float
    version: str
    input_hashes: dict


def _canonical_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return {k: str(v) if isinstance(v, Fraction) else v for k, v in sorted(cfg.items())}


def _build_manifest(args: argparse.Namespace) -> RunManifest:
    cfg = _canonical_config(args)
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return RunManifest(
        subcommand=args.subcommand,
        config=cfg,
        seed=getattr(args, "seed", None),
        wall_time_s=0.0,
        version=_VERSION,
        input_hashes={"config_sha256": hashlib.sha256(blob.encode()).hexdigest()},
    )


def _jsonable(x):
    if isinstance(x, Fraction):
        return {"num": x.numerator, "den": x.denominator}
    if isinstance(x, bool) or x is None or isinstance(x, (int, float, str)):
        return x
    if is_dataclass(x) and not isinstance(x, type):
        return {k: _jsonable(v) for k, v in asdict(x).items()}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):  # numpy scalar
        return x.item()
    return str(x)


def _cell(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(out: Optional[str], manifest: RunManifest, scalars: dict,
          header: list, rows: list, payload: dict) -> None:
    doc = {"manifest": _jsonable(asdict(manifest))}
    doc.update(_jsonable(payload))
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    if out.endswith(".json"):
        Path(out).write_text(text)
        return
    if not out.endswith(".csv"):
        raise ConfigError("--out must end in .csv or .json")
    buf = io.StringIO()
    for key in ("subcommand", "version", "seed"):
        buf.write(f"# {key}: {getattr(manifest, key)}\n")
    cfg_blob = json.dumps(manifest.config, sort_keys=True, separators=(",", ":"))
    buf.write(f"# config: {cfg_blob}\n")
    buf.write(f"# config_sha256: {manifest.input_hashes['config_sha256']}\n")
    buf.write(f"# wall_time_s: {manifest.wall_time_s!r}\n")
    for k, v in scalars.items():
        buf.write(f"# {k}: {_cell(v)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    Path(out).write_text(buf.getvalue())


# ---------------------------------------------------------------------------
# Subcommands.  Each returns (scalars, header, rows, payload).
# ---------------------------------------------------------------------------


def _cmd_classify(args):
    curve = cc.CurveParams(args.a, args.b)
    m = cc.minimal_pair(curve)
    c4, c6 = cc.c_invariants(m)
    cond = cc.conductor(m, at23="tate")
    inv = {
        "a": curve.a,
        "b": curve.b,
        "minimal_a": m.a,
        "minimal_b": m.b,
        "delta": cc.discriminant(m),
        "cond_poly": cc.conductor_polynomial(m),
        "c4": c4,
        "c6": c6,
        "in_family": cc.in_family(m),
        "conductor": cond,
        "index_prime_to_6": cc.index(m, at23="ignore"),
    }
    if cond > 1:
        inv["szpiro_ratio"] = cc.szpiro_ratio(m)
        inv["avg_szpiro"] = cc.avg_szpiro(m)

    disc = cc.discriminant(m)
    bad = [p for p in (2, 3) if disc % p == 0] + cc.bad_primes_large(m)
    header = ["p", "v_a", "v_b", "v_c", "v_disc", "v_disc_min",
              "symbol", "conductor_exponent"]
    rows = []
    local = []
    for p in bad:
        red = cc.tate_algorithm(m, p) if p < 5 else cc.kodaira_symbol_large_p(m, p)
        rows.append([red.p, red.v_a, red.v_b, red.v_c, red.v_disc,
                     red.v_disc_min, str(red.symbol), red.conductor_exponent])
        local.append({
            "p": red.p, "v_a": red.v_a, "v_b": red.v_b, "v_c": red.v_c,
            "v_disc": red.v_disc, "v_disc_min": red.v_disc_min,
            "symbol": str(red.symbol), "conductor_exponent": red.conductor_exponent,
        })
    return inv, header, rows, {"invariants": inv, "local": local}


_FAMILY_NAMES = {"condpoly": "CondPoly", "cubefree": "CubeFree", "kappa": "Kappa"}
_ORDER_NAMES = {"condpoly": "CondPoly", "conductor": "Conductor"}


def _parse_grid(text: Optional[str]) -> Optional[tuple]:
    if text is None:
        return None
    try:
        return tuple(int(float(tok)) for tok in text.split(","))
    except ValueError as e:
        raise ConfigError(f"bad grid {text!r}: {e}") from None


def _apply_sieve_env() -> None:
    bound = os.environ.get("CENSUS_SIEVE_BOUND")
    if bound:
        try:
            arithmetic.ensure_sieve(int(float(bound)))
        except ValueError as e:
            raise ConfigError(f"bad CENSUS_SIEVE_BOUND: {e}") from None


def _cmd_census(args):
    _apply_sieve_env()
    try:
        family = _FAMILY_NAMES[args.family.lower()]
        order = _ORDER_NAMES[args.order_by.lower()]
    except KeyError as e:
        raise ConfigError(f"unknown name {e.args[0]!r}") from None
    config = census.CensusConfig(
        X=int(float(args.x)),
        family=family,
        kappa=args.kappa,
        order_by=order,
        index_cap=args.index_cap,
        good_reduction_filter=not args.all_residues,
        workers=args.workers,
    )
    report = census.run_census(
        config, cutoffs=_parse_grid(args.grid), euler_tol=args.euler_tol
    )
    tails_text = ";".join(f"{k}={report.tails[k]}" for k in sorted(report.tails))
    header = ["X", "count", "predicted", "ratio", "tails"]
    rows = [
        [x, n, pred, ratio, tails_text]
        for x, n, pred, ratio in zip(
            report.cutoffs, report.counts, report.predicted, report.ratios)
    ]
    scalars = {"total_curves": report.total_curves}
    return scalars, header, rows, {"report": report}


_CLASS_CHOICES = ("Good", "III", "I0*", "III*", "semistable")


def _cmd_local_density(args):
    cls = args.klass
    k = args.k
    closed = local_density.density_kodaira(args.p, cls, k)
    row = {"p": args.p, "class": cls, "k": k, "density": closed}
    if args.check:
        m = args.m if args.m else (k + 1 if cls == "semistable" else
                                   {"Good": 1, "III": 2, "I0*": 3, "III*": 4}[cls])
        empirical = local_density.density_empirical(args.p, m, cls, k)
        row["empirical"] = empirical
        row["match"] = empirical == closed
        if empirical != closed:
            raise OracleMismatch(
                f"density mismatch at p={args.p} {cls}: "
                f"closed {closed} vs counted {empirical}")
    header = list(row)
    return {}, header, [list(row.values())], {"density": row}


def _cmd_real_density(args):
    if args.method == "closed":
        value, err = real_density.area_closed_form(args.z), 0.0
    elif args.method == "quad":
        value, err = real_density.area_quadrature(args.z, args.tol), args.tol
    else:
        value, err = real_density.area_monte_carlo(args.z, args.samples, args.seed)
    row = {"method": args.method, "Z": args.z, "value": value, "error": err}
    return {}, list(row), [list(row.values())], {"area": row}


def _cmd_lp(args):
    if args.sweep:
        rows = lp_bounds.sweep_grid()
    else:
        lp = lp_bounds.build_primal(args.delta, args.r)
        cert = lp_bounds.certificate_value(args.delta, args.r)
        opt, _ = lp_bounds.solve_simplex(lp)
        rows = [(args.delta, args.r, cert, opt, cert == opt)]
    header = ["delta", "r", "certificate", "simplex", "match"]
    payload = {"rows": [dict(zip(header, r)) for r in rows]}
    if not all(r[4] for r in rows):
        raise OracleMismatch("simplex optimum disagrees with the certificate value")
    return {}, header, [list(r) for r in rows], payload


def _cmd_tails(args):
    _apply_sieve_env()
    grid = _parse_grid(args.grid) or (int(float(args.x)),)
    rows = []
    for X in grid:
        if args.kind == "index":
            n = census.tail_count_index(X, args.delta, workers=args.workers)
            params = f"delta={args.delta}"
        else:
            n = census.tail_count_szpiro(X, args.theta, args.kappa,
                                         workers=args.workers)
            params = f"theta={args.theta};kappa={args.kappa}"
        rows.append([args.kind, X, params, n, n / X**0.75])
    header = ["kind", "X", "params", "count", "count_over_X34"]
    payload = {"tails": [dict(zip(header, r)) for r in rows]}
    return {}, header, rows, payload


def _cmd_euler(args):
    try:
        family = _FAMILY_NAMES[args.family.lower()]
    except KeyError:
        raise ConfigError(f"unknown family {args.family!r}") from None
    product, cutoff = local_density.euler_product(family, args.tol)
    dirichlet, dcutoff = local_density.dirichlet_index_sum(family, args.tol)
    constant = local_density.mt1_constant(family, tol=args.tol)
    row = {
        "family": family,
        "tol": args.tol,
        "euler_product": product,
        "product_cutoff": cutoff,
        "dirichlet_index_sum": dirichlet,
        "dirichlet_cutoff": dcutoff,
        "mt1_constant": constant,
    }
    return {}, list(row), [list(row.values())], {"euler": row}


# ---------------------------------------------------------------------------
# Parser and dispatch.
# ---------------------------------------------------------------------------


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twotor",
        description="Census and verification tools for y^2 = x(x^2+ax+b).",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out",
                        help="output file (.csv or .json); default JSON to stdout")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add("classify", help="invariants and per-prime reduction table")
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.set_defaults(func=_cmd_classify)

    p = add("census", help="count curves against the X^{3/4} prediction")
    p.add_argument("--x", required=True, help="height bound, e.g. 1e6")
    p.add_argument("--family", default="condpoly",
                   choices=sorted(_FAMILY_NAMES) + sorted(_FAMILY_NAMES.values()))
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--order-by", default="condpoly", dest="order_by",
                   choices=sorted(_ORDER_NAMES) + sorted(_ORDER_NAMES.values()))
    p.add_argument("--index-cap", type=int, default=10**4, dest="index_cap")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--grid", help="comma-separated cutoffs, e.g. 1e4,1e5,1e6")
    p.add_argument("--euler-tol", type=float, default=None, dest="euler_tol")
    p.add_argument("--all-residues", action="store_true",
                   help="disable the good-reduction residue filter")
    p.set_defaults(func=_cmd_census)

    p = add("local-density", help="closed-form vs counted p-adic density")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--class", dest="klass", required=True, choices=_CLASS_CHOICES)
    p.add_argument("--k", type=int, default=None, help="index power for semistable")
    p.add_argument("--m", type=int, default=None, help="grid exponent override")
    p.add_argument("--check", action="store_true",
                   help="also count residues and compare exactly")
    p.set_defaults(func=_cmd_local_density)

    p = add("real-density", help="archimedean area constant")
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--method", choices=("closed", "quad", "mc"), default="closed")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_real_density)

    p = add("lp", help="exponent LP certificates and simplex check")
    p.add_argument("--delta", type=_fraction, default=Fraction(0))
    p.add_argument("--r", type=_fraction, default=Fraction(0))
    p.add_argument("--sweep", action="store_true", help="run the default (delta, r) grid")
    p.set_defaults(func=_cmd_lp)

    p = add("tails", help="large-index and large-Szpiro tail counts")
    p.add_argument("kind", choices=("index", "szpiro"))
    p.add_argument("--x", default="1e4", help="height bound (ignored with --grid)")
    p.add_argument("--grid", help="comma-separated bounds, e.g. 1e4,1e5")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--kappa", type=float, default=2.2)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_tails)

    p = add("euler", help="Euler products and the leading constant")
    p.add_argument("--family", default="condpoly",
                   choices=sorted(_FAMILY_NAMES) + sorted(_FAMILY_NAMES.values()))
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_euler)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    manifest = _build_manifest(args)
    start = time.perf_counter()
    try:
        scalars, header, rows, payload = args.func(args)
    except (ConfigError, ValueError) as e:
        print(f"twotor: config error: {e}", file=sys.stderr)
        return 2
    except (AssertionError, cc.ClassificationError) as e:
        print(f"twotor: internal check failed: {e}", file=sys.stderr)
        return 3
    manifest.wall_time_s = time.perf_counter() - start

    try:
        _emit(args.out, manifest, scalars, header, rows, payload)
    except ConfigError as e:
        print(f"twotor: config error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
