"""Command-line entry point: ``fisheye-adapter {convert,evaluate,remap}``.

Exit codes: 0 success, 1 bad input (arguments, documents, files), 2 numerical
failure during conversion or evaluation.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import evaluation as ev
from .converter import convert
from .errors import (
    AllSamplesInvalid,
    DimensionMismatch,
    MalformedHeader,
    NoConvergence,
    NumericalFailure,
    OutOfDomain,
    ParseError,
    RankDeficient,
    SingularJacobian,
    TooFewValidSamples,
    UnsupportedFormat,
    ValidationError,
)
from .io import load_model, load_raster, save_model, save_raster
from .lm import LmOptions
from .models import KINDS
from .sampler import DEFAULT_N, sample_grid

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2

REPORT_KEYS = ("n", "accepted_n", "iterations", "rms_re_px", "max_re_px", "wall_time_ms", "psnr_db", "ssim")

_INPUT_ERRORS = (
    ValidationError,
    ParseError,
    UnsupportedFormat,
    MalformedHeader,
    DimensionMismatch,
    FileExistsError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)
_NUMERIC_ERRORS = (
    NoConvergence,
    RankDeficient,
    SingularJacobian,
    TooFewValidSamples,
    AllSamplesInvalid,
    NumericalFailure,
    OutOfDomain,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; that code is reserved
    # for numerical failures here
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _format(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def format_report(values: dict, keys=None) -> str:
    """``key: value`` lines; keys listed in ``keys`` but absent print as nan."""
    keys = keys if keys is not None else tuple(values)
    return "".join(f"{k}: {_format(values.get(k, math.nan))}\n" for k in keys)


def _emit(text: str, path: str | None, force: bool) -> None:
    sys.stdout.write(text)
    if path:
        p = Path(path)
        if p.exists() and not force:
            raise FileExistsError(f"{p} exists; pass --force to replace it")
        p.write_text(text, encoding="utf-8")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _fov(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected degrees, got {text!r}") from None
    if not 0.0 < v <= 360.0:
        raise argparse.ArgumentTypeError("must be in (0, 360]")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fisheye-adapter", description="Convert fisheye camera models between families.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("convert", help="fit a model of another family to an input model")
    c.add_argument("--input", required=True, help="input model document")
    c.add_argument("--target", required=True, choices=KINDS, help="output model family")
    c.add_argument("--output", required=True, help="output model document")
    c.add_argument("--samples", type=_positive_int, default=DEFAULT_N, help="grid samples (default %(default)s)")
    c.add_argument("--max-iters", type=_positive_int, default=LmOptions.max_iters)
    c.add_argument(
        "--max-fov-deg",
        type=_fov,
        default=None,
        help="only fit rays within this full field of view (useful for rt targets)",
    )
    c.add_argument("--report", help="also write the report block to this file")
    c.add_argument("--force", action="store_true", help="overwrite existing output files")

    e = sub.add_parser("evaluate", help="reprojection and parameter error of a candidate model")
    e.add_argument("--input", required=True, help="model the samples are drawn from")
    e.add_argument("--candidate", required=True, help="model to score")
    e.add_argument("--gt", help="ground-truth model of the candidate's family")
    e.add_argument("--samples", type=_positive_int, default=DEFAULT_N)

    r = sub.add_parser("remap", help="re-render an image as seen through another model")
    r.add_argument("--image", required=True, help="PGM/PPM source image")
    r.add_argument("--from", dest="from_model", required=True, help="model the image was taken with")
    r.add_argument("--to", dest="to_model", required=True, help="model to render through")
    r.add_argument("--output", required=True, help="PGM/PPM destination")
    r.add_argument("--metrics", action="store_true", help="print PSNR/SSIM against the source")
    r.add_argument("--force", action="store_true")
    return parser


def _cmd_convert(args) -> int:
    model = load_model(args.input)
    out = Path(args.output)
    if out.exists() and not args.force:
        raise FileExistsError(f"{out} exists; pass --force to replace it")
    max_inc = None if args.max_fov_deg is None else math.radians(args.max_fov_deg / 2.0)
    result, report = convert(model, args.target, n=args.samples, opts=LmOptions(max_iters=args.max_iters), max_incidence=max_inc)
    save_model(result, out, overwrite=args.force)
    _emit(format_report(report.as_dict(), REPORT_KEYS), args.report, args.force)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    model = load_model(args.input)
    cand = load_model(args.candidate)
    samples = sample_grid(model, args.samples)
    rms, worst = ev.reprojection_error(model, cand, samples)
    values = {"n": args.samples, "accepted_n": samples.accepted_n, "rms_re_px": rms, "max_re_px": worst}
    if args.gt:
        gt = load_model(args.gt)
        if gt.kind != cand.kind:
            raise ValidationError(f"ground truth is {gt.kind} but the candidate is {cand.kind}")
        values["pe"] = ev.parameter_error(cand.params.to_vector(), gt.params.to_vector())
        values["rmse_coeffs"] = ev.coeff_rmse(
            ev.distortion_coeffs(cand.params, gt.params), ev.distortion_coeffs(gt.params, gt.params)
        )
    sys.stdout.write(format_report(values))
    return EXIT_OK


def _cmd_remap(args) -> int:
    image = load_raster(args.image)
    src = load_model(args.from_model)
    dst = load_model(args.to_model)
    res = ev.remap(image, src, dst)
    save_raster(res.image, args.output, overwrite=args.force)
    values = {"invalid_px": res.invalid_count}
    if args.metrics:
        mask = res.mask
        values["psnr_db"] = ev.psnr(image, res.image, mask) if np.any(mask) else math.nan
        try:
            values["ssim"] = ev.ssim(image, res.image, mask)
        except ValueError:
            values["ssim"] = math.nan
    sys.stdout.write(format_report(values))
    return EXIT_OK


_COMMANDS = {"convert": _cmd_convert, "evaluate": _cmd_evaluate, "remap": _cmd_remap}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
