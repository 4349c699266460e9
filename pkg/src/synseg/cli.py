"""``synseg`` command line: render, convert, evaluate, plan.

Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
``SYNSEG_OUT`` supplies ``--out`` for render/convert when the flag is
omitted; ``SYNSEG_GT`` does the same for ``evaluate --gt``.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys

from .evaluation import evaluate_dataset
from .plan import STAGES, emit_plan
from .voc import VOC, ClassTaxonomy, read_box_annotations

log = logging.getLogger("synseg")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=default(0),
                   help="root seed for all randomness")
    p.add_argument("--threads", type=int, default=default(1),
                   help="worker threads (affects wall time only)")
    p.add_argument("-v", "--verbose", action="count", default=default(0),
                   help="more logging; repeat for debug output")
    return p


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="synseg", description=__doc__, formatter_class=fmt,
                     parents=[_common(False)])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    shared = _common(True)

    r = sub.add_parser("render", parents=[shared], formatter_class=fmt,
                       help="render a synthetic dataset")
    r.add_argument("--config", help="forge config file (key = value); built-in defaults if omitted")
    r.add_argument("--out", default=os.environ.get("SYNSEG_OUT"), help="output directory")
    r.add_argument("--samples-per-class", type=int, default=None,
                   help="override samples_per_class from the config")
    r.add_argument("--size", default=None, metavar="WxH", help="override the frame size")

    c = sub.add_parser("convert", parents=[shared], formatter_class=fmt,
                       help="turn box annotations into label images")
    c.add_argument("--images", required=True, help="directory of <image_id>.{jpg,png,...}")
    c.add_argument("--boxes", required=True,
                   help="annotation file: 'image_id class_name xmin ymin xmax ymax' per line")
    c.add_argument("--out", default=os.environ.get("SYNSEG_OUT"), help="output directory")
    c.add_argument("--method", choices=("crf", "grabcut"), default=None,
                   help="conversion method (config file or 'crf' when unset)")
    c.add_argument("--config", help="key = value file with any of the parameters below")
    g = c.add_argument_group("GrabCut")
    g.add_argument("--gmm-components", type=int, default=None, help="colour GMM components [5]")
    g.add_argument("--gamma", type=float, default=None, help="boundary strength [50]")
    g.add_argument("--iterations", type=int, default=None, help="refit/cut rounds [5]")
    g.add_argument("--neighborhood", type=int, choices=(4, 8), default=None, help="pixel connectivity [8]")
    k = c.add_argument_group("dense CRF")
    k.add_argument("--spatial-weight", type=float, default=None, help="w_s [3]")
    k.add_argument("--spatial-sigma", type=float, default=None, help="theta_gamma, pixels [3]")
    k.add_argument("--bilateral-weight", type=float, default=None, help="w_b [10]")
    k.add_argument("--bilateral-spatial-sigma", type=float, default=None, help="theta_alpha, pixels [80]")
    k.add_argument("--bilateral-color-sigma", type=float, default=None, help="theta_beta, 8-bit units [13]")
    k.add_argument("--mean-field-iterations", type=int, default=None, help="mean-field rounds [10]")
    k.add_argument("--inside-fg-prob", type=float, default=None, help="class mass inside a box [0.9]")
    k.add_argument("--outside-bg-prob", type=float, default=None, help="background mass outside boxes [0.99]")

    e = sub.add_parser("evaluate", parents=[shared], formatter_class=fmt,
                       help="mean IoU of predicted labels against ground truth")
    e.add_argument("--pred", required=True, help="directory of predicted label PNGs")
    e.add_argument("--gt", default=os.environ.get("SYNSEG_GT"), help="directory of ground-truth label PNGs")
    e.add_argument("--classes", help="class-name file, one per line (21 names)")
    e.add_argument("--report", help="also write the key-value report to this file")

    p = sub.add_parser("plan", parents=[shared], formatter_class=fmt,
                       help="emit a fine-tuning plan")
    p.add_argument("--stage", required=True, help=f"one of {', '.join(STAGES)}")
    p.add_argument("--dataset", action="append", default=[], help="manifest path (repeatable)")
    p.add_argument("--out", help="write the plan here instead of standard output")
    return parser


def _setup_logging(verbosity: int) -> None:
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _require_out(args) -> str:
    if not args.out:
        raise UsageError("--out is required (or set SYNSEG_OUT)")
    return args.out


def cmd_render(args) -> int:
    from .forge import ForgeConfig, generate_dataset

    config = ForgeConfig.from_file(args.config) if args.config else ForgeConfig()
    overrides = {"dataset_seed": args.seed}
    if args.samples_per_class is not None:
        overrides["samples_per_class"] = args.samples_per_class
    if args.size:
        try:
            w, h = (int(v) for v in args.size.lower().split("x"))
        except ValueError:
            raise UsageError(f"bad --size {args.size!r}; expected WxH") from None
        overrides.update(width=w, height=h)
    config = config.with_overrides(**overrides)
    out = _require_out(args)
    entries = generate_dataset(config, out, threads=args.threads)
    log.info("rendered %d samples into %s", len(entries), out)
    print(f"{len(entries)} samples written to {out}")
    return EXIT_OK


_GRABCUT_KEYS = {"gmm_components": int, "gamma": float, "iterations": int, "neighborhood": int}
_CRF_KEYS = {"spatial_weight": float, "spatial_sigma": float, "bilateral_weight": float,
             "bilateral_spatial_sigma": float, "bilateral_color_sigma": float,
             "mean_field_iterations": int}
_PRIOR_KEYS = {"inside_fg_prob": float, "outside_bg_prob": float}


def _convert_settings(args) -> dict:
    settings = {}
    if args.config:
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
        with open(args.config) as f:
            parser.read_string("[convert]\n" + f.read())
        known = {**_GRABCUT_KEYS, **_CRF_KEYS, **_PRIOR_KEYS, "method": str}
        for key, value in parser["convert"].items():
            if key not in known:
                raise UsageError(f"unknown convert config key {key!r}")
            try:
                settings[key] = known[key](value)
            except ValueError:
                raise UsageError(f"bad value for {key}: {value!r}") from None
    for key in {**_GRABCUT_KEYS, **_CRF_KEYS, **_PRIOR_KEYS, "method": str}:
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    return settings


def cmd_convert(args) -> int:
    from .weak import CrfParams, GrabCutParams, convert_dataset

    settings = _convert_settings(args)
    method = settings.pop("method", "crf")
    if method not in ("crf", "grabcut"):
        raise UsageError(f"unknown method {method!r}")
    gc = GrabCutParams(**{k: settings[k] for k in _GRABCUT_KEYS if k in settings})
    crf_kw = {k: settings[k] for k in _CRF_KEYS if k in settings}
    if "mean_field_iterations" in crf_kw:
        crf_kw["iterations"] = crf_kw.pop("mean_field_iterations")
    crf = CrfParams(**crf_kw)
    prior = {k: settings[k] for k in _PRIOR_KEYS if k in settings}
    annotations = read_box_annotations(args.boxes)
    out = _require_out(args)
    manifest = convert_dataset(args.images, annotations, out, method=method, grabcut_params=gc,
                               crf_params=crf, seed=args.seed, threads=args.threads, **prior)
    print(f"{len(manifest)} label images written to {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if not args.gt:
        raise UsageError("--gt is required (or set SYNSEG_GT)")
    taxonomy = ClassTaxonomy.from_file(args.classes) if args.classes else VOC
    report = evaluate_dataset(args.pred, args.gt, taxonomy)
    sys.stdout.write(report.format_table(taxonomy))
    sys.stdout.write("\n" + report.format_keyvalue(taxonomy))
    if args.report:
        with open(args.report, "w") as f:
            f.write(report.format_keyvalue(taxonomy))
    return EXIT_OK


def cmd_plan(args) -> int:
    if args.stage not in STAGES:
        raise UsageError(f"unknown stage {args.stage!r}; expected one of {', '.join(STAGES)}")
    text = emit_plan(args.stage, args.dataset).to_text()
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"render": cmd_render, "convert": cmd_convert, "evaluate": cmd_evaluate, "plan": cmd_plan}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("synseg: error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    _setup_logging(args.verbose)
    if args.threads < 1:
        print("synseg: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"synseg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, LookupError, RuntimeError) as exc:
        print(f"synseg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
