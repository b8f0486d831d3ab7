"""``bgsweep`` command line: run, sweep, synth, score."""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from bgsweep.bench import (
    Method,
    SweepConfig,
    emit_csv,
    parse_ratios,
    run_sweep,
    score_directories,
    with_seed,
)
from bgsweep.datasets import (
    Layout,
    SequenceSpec,
    SyntheticConfig,
    export_synthetic,
    write_pgm,
)
from bgsweep.errors import BgsError, ConfigError
from bgsweep.gmm import GmmParams
from bgsweep.vibe import VibeParams

log = logging.getLogger("bgsweep")


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"{stage} failed: {cause}")
        self.stage = stage


def _stage(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (BgsError, OSError) as exc:
        raise StageError(stage, exc) from exc


def _parse_params(method: Method, overrides: list[str]):
    params_type = VibeParams if method is Method.VIBE else GmmParams
    fields = {f.name: f.type for f in dataclasses.fields(params_type)}
    values = {}
    for item in overrides or []:
        key, sep, raw = item.partition("=")
        if not sep or key not in fields:
            raise ConfigError(f"unknown {method.value} parameter {item!r}; "
                              f"choose from {', '.join(fields)}")
        cast = float if params_type is GmmParams and key != "components" else int
        try:
            values[key] = cast(raw)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return params_type(**values)


def _sequence_from_args(args) -> SequenceSpec:
    input_dir = Path(args.input)
    gt_dir = Path(args.gt) if args.gt else None
    layout = Layout(args.layout)
    # accept the root of an exported synthetic sequence
    if layout is Layout.SYNTHETIC and (input_dir / "input").is_dir():
        gt_dir = gt_dir or input_dir / "groundtruth"
        input_dir = input_dir / "input"
    name = args.name or (input_dir.parent.name if input_dir.name == "input" else input_dir.name)
    roi = tuple(args.roi) if args.roi else None
    return SequenceSpec(name=name, input_dir=input_dir, groundtruth_dir=gt_dir, layout=layout,
                        temporal_roi=roi, frame_pattern=args.frame_pattern,
                        mask_pattern=args.mask_pattern)


def _mask_dumper(root: Path | None, per_ratio: bool):
    if root is None:
        return None
    root.mkdir(parents=True, exist_ok=True)

    def sink(ratio, index, mask):
        target = root / f"ratio{ratio:02d}" if per_ratio else root
        target.mkdir(exist_ok=True)
        write_pgm(target / f"bin{index:06d}.pgm", mask)

    return sink


def _cmd_sweep(args, ratios):
    method = Method(args.method)
    params = with_seed(_parse_params(method, args.param), args.seed)
    sequence = _stage("configuration", _sequence_from_args, args)
    config = _stage("configuration", SweepConfig, sequence=sequence, method=method,
                    ratios=ratios, params=params, timing_repeats=args.repeats,
                    honor_roi=not args.no_roi, output=args.out)
    dump_root = Path(args.dump_masks) if args.dump_masks else None
    sink = _mask_dumper(dump_root, per_ratio=len(config.ratios) > 1)
    records = _stage("sweep", run_sweep, config, jobs=getattr(args, "jobs", 1),
                     timing=not getattr(args, "no_timing", False), mask_sink=sink)
    _stage("write", emit_csv, records, config.output)
    for rec in records:
        f = "-" if rec.f_measure is None else f"{rec.f_measure:.4f}"
        cpu = "-" if rec.cpu_seconds is None else f"{rec.cpu_seconds:.4f}s"
        log.info("%s %s ratio=%d F=%s cpu=%s", rec.dataset, rec.method, rec.ratio, f, cpu)


def cmd_run(args):
    _cmd_sweep(args, [args.ratio])


def cmd_sweep(args):
    _cmd_sweep(args, _stage("configuration", parse_ratios, args.ratios))


def cmd_synth(args):
    config = _stage("configuration", SyntheticConfig, width=args.width, height=args.height,
                    frames=args.frames, seed=args.seed, square_size=args.square_size,
                    background_level=args.background, square_level=args.square_level,
                    velocity=tuple(args.velocity), noise_amplitude=args.noise)
    _stage("write", export_synthetic, config, args.out)
    log.info("wrote %d frames to %s", config.frames, args.out)


def cmd_score(args):
    record = _stage("score", score_directories, args.pred, args.gt, honor_roi=not args.no_roi,
                    strict=args.strict)
    _stage("write", emit_csv, [record], args.out)


def _add_sequence_args(p):
    p.add_argument("--input", required=True, help="frame directory")
    p.add_argument("--gt", help="groundtruth directory")
    p.add_argument("--layout", choices=[l.value for l in Layout], default="changedetection")
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--seed", type=int, help="ViBe RNG seed")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override an algorithm parameter, e.g. match_radius=15")
    p.add_argument("--no-roi", action="store_true", help="score every frame, ignoring temporalROI.txt")
    p.add_argument("--roi", type=int, nargs=2, metavar=("FIRST", "LAST"),
                   help="temporal ROI (1-based, inclusive) overriding temporalROI.txt")
    p.add_argument("--name", help="dataset name for the CSV (default: directory name)")
    p.add_argument("--frame-pattern", help="cmu layout: regex for frame files, group 1 = number")
    p.add_argument("--mask-pattern", help="cmu layout: regex for mask files, group 1 = number")
    p.add_argument("--repeats", type=int, default=1, help="timing repeats per ratio")
    p.add_argument("--dump-masks", metavar="DIR", help="write upsampled masks as PGM")
    p.add_argument("--out", required=True, help="CSV output file")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bgsweep",
        description="Background subtraction on downsampled frames: accuracy vs CPU time.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one method at one compression ratio")
    _add_sequence_args(p)
    p.add_argument("--ratio", type=int, required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run one method over many compression ratios")
    _add_sequence_args(p)
    p.add_argument("--ratios", default="0..99", help="'0..99[:step]' or '0,20,40'")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel ratios; only honoured with --no-timing")
    p.add_argument("--no-timing", action="store_true", help="leave CPU columns empty")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic moving-square sequence as PGM")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--square-size", type=int, default=16)
    p.add_argument("--background", type=int, default=50)
    p.add_argument("--square-level", type=int, default=150)
    p.add_argument("--velocity", type=int, nargs=2, default=(4, 3), metavar=("DX", "DY"))
    p.add_argument("--noise", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="score externally produced masks")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--no-roi", action="store_true")
    p.add_argument("--strict", action="store_true", help="reject labels outside {0,50,85,170,255}")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except StageError as exc:
        print(f"bgsweep {args.command}: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"bgsweep {args.command}: configuration failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
