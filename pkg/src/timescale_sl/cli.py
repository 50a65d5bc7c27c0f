"""Command-line front end.

Exit status: 0 success, 1 validation error, 2 numerical failure,
3 non-convergence of ``invert`` (the report is still written).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import verify_all
from .domain import Grid, make_domain
from .errors import DomainError, StructuralError, TimeScaleError, UnsupportedError
from .forward import (
    SearchOptions,
    SpectralData,
    closed_form_char_zero_potential,
    eigenvalues,
    extract_data,
    shoot,
)
from .inverse import FixedData, InverseConfig, reconstruct
from .io import csv_text, read_spectral_data, trace_rows, validate_spec_file, write_json

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_NOCONV = 0, 1, 2, 3


def _floats(text: str, name: str, count: int | None = None) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise StructuralError(f"--{name} must be comma-separated numbers, got {text!r}") from None
    if count is not None and len(values) != count:
        raise StructuralError(f"--{name} needs exactly {count} values")
    if not values:
        raise StructuralError(f"--{name} is empty")
    return values


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj, out):
    _emit(write_json(obj, None), out)


def cmd_forward(args) -> int:
    spec = validate_spec_file(args.spec)
    lambdas = _floats(args.lambdas, "lambdas")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = Grid.uniform(spec.domain, args.cells)
    for k, lam in enumerate(lambdas):
        trace = shoot(spec, lam, grid)
        (outdir / f"trace_{k:03d}.csv").write_text(csv_text(trace_rows(trace)), encoding="utf-8")
    _json({"lambdas": lambdas, "files": [f"trace_{k:03d}.csv" for k in range(len(lambdas))]},
          str(outdir / "index.json"))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    spec = validate_spec_file(args.spec)
    ev = eigenvalues(spec, args.n, SearchOptions(s_ceiling=args.s_ceiling))
    _json({"eigenvalues": ev.eigenvalues.tolist()}, args.out)
    return EXIT_OK


def cmd_extract(args) -> int:
    spec = validate_spec_file(args.spec)
    _json(extract_data(spec, args.n, SearchOptions(s_ceiling=args.s_ceiling)).to_dict(), args.out)
    return EXIT_OK


def cmd_invert(args) -> int:
    target = read_spectral_data(args.data)
    fixed_spec = validate_spec_file(args.fixed, require_q=False)
    if not fixed_spec.domain.symmetric:
        raise UnsupportedError("inversion needs a1 + a2 = l")
    kl, kr = (int(v) for v in _floats(args.modes, "modes", 2))
    n_data = args.n_data or target.count
    if args.noise:
        rng = np.random.default_rng(args.seed)
        target = SpectralData(
            target.eigenvalues + args.noise * rng.standard_normal(target.count),
            target.ratios + args.noise * rng.standard_normal(target.count),
            target.flags,
        )
    cfg = InverseConfig(
        n_data=n_data, n_basis_left=kl, n_basis_right=kr, reg=args.reg, max_iter=args.max_iter
    )
    report = reconstruct(target, FixedData.of(fixed_spec), cfg)
    _json(report.to_dict(), args.out)
    return EXIT_OK if report.converged else EXIT_NOCONV


def cmd_verify(args) -> int:
    spec = validate_spec_file(args.spec)
    _json(verify_all(spec), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    a1, a2, l = _floats(args.domain, "domain", 3)
    domain = make_domain(a1, a2, l)
    if args.step <= 0 or args.smax < 0:
        raise StructuralError("--step must be > 0 and --smax >= 0")
    s = np.arange(0.0, args.smax + 0.5 * args.step, args.step)
    delta = closed_form_char_zero_potential(domain, s * s)
    rows = [("s", "lambda", "delta")] + [
        (float(a), float(a * a), float(b)) for a, b in zip(s, np.atleast_1d(delta))
    ]
    _emit(csv_text(rows), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timescale-sl",
        description="Sturm-Liouville problems on T = [0,a1] U [a2,l]: spectra, interior data, inversion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forward", help="write solution traces (CSV) for a list of lambdas")
    p.add_argument("--spec", required=True)
    p.add_argument("--lambdas", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--cells", type=int, default=64, help="grid cells per interval")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("spectrum", help="first N eigenvalues as JSON")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s-ceiling", type=float, default=None, help="largest sqrt(lambda) scanned")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("extract", help="eigenvalues and interior ratios as JSON")
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s-ceiling", type=float, default=None, help="largest sqrt(lambda) scanned")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("invert", help="reconstruct q from extracted data")
    p.add_argument("--data", required=True)
    p.add_argument("--fixed", required=True, help="spec file supplying a1, a2, l, h, H")
    p.add_argument("--modes", default="4,4", help="cosine modes KL,KR")
    p.add_argument("--reg", type=float, default=1e-8)
    p.add_argument("--n-data", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--noise", type=float, default=0.0, help="std of additive noise on eigenvalues and ratios")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("verify", help="run every analysis check")
    p.add_argument("--spec", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="closed-form Delta table for q = 0, h = H = 0")
    p.add_argument("--domain", required=True, help="a1,a2,l")
    p.add_argument("--smax", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "n", 1) < 1:
            raise StructuralError("--n must be >= 1")
        return args.func(args)
    except (StructuralError, DomainError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TimeScaleError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
