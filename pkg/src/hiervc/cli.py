"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable input,
corrupt bitstream, invalid parameter values).  Errors print one line on
stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .codec import FRAME_HEADER, BitstreamError, CodecConfig, Decoder, encode_sequence
from .core import Sequence
from .harness import (
    ExperimentReport,
    FrameRow,
    run_no_information_test,
    run_quality_structure_report,
    run_rd_sweep,
)
from .metrics import bd_rate, psnr
from .structure import StructureConfig, build_schedule, schedule_to_csv
from .synth import PATTERNS, SyntheticSpec, gen_synthetic
from .y4m import Y4MError, parse_y4m, write_y4m

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _pair(text: str) -> tuple:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers 'dx,dy', got {text!r}") from None
    return a, b


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_coding_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base-step", type=float, default=16.0, help="frame quantizer step before layer scaling")
    p.add_argument("--intra-period", type=int, default=-1, help="-1 codes only frame 0 as intra")
    p.add_argument("--weights", type=_floats, default=None, help="four hierarchical weights, e.g. 0.5,1.2,0.5,0.9")
    p.add_argument("--no-lookahead", action="store_true", help="disable one-frame lookahead")
    p.add_argument("--lookahead-strength", type=float, default=0.2)
    p.add_argument("--omega-mode", choices=("off", "random_key"), default="off")
    p.add_argument("--seed", type=int, default=None, help="seed for random key-frame omega")
    p.add_argument("--single-ref", action="store_true", help="adjacent-frame prediction only")


def _add_source_args(p: argparse.ArgumentParser, frames: int = 33) -> None:
    p.add_argument("input", nargs="?", help="Y4M input; a synthetic sequence is used when omitted")
    p.add_argument("--synth-seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=frames)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--motion", type=_pair, default=(1, 0))
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--pattern", choices=PATTERNS, default="mixed")


def _add_csv(p: argparse.ArgumentParser) -> None:
    p.add_argument("--csv", metavar="PATH", help="write a CSV report to PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hiervc", description="Hierarchical block-based video codec and experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("encode", help="encode a Y4M file to an .ehb bitstream")
    p.add_argument("input")
    p.add_argument("output")
    _add_coding_args(p)
    _add_csv(p)

    p = sub.add_parser("decode", help="decode an .ehb bitstream to Y4M")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--reference", help="original Y4M; adds per-frame PSNR to the CSV")
    p.add_argument("--conceal", action="store_true", help="replace undecodable frames by the previous frame")
    _add_csv(p)

    p = sub.add_parser("sweep", help="rate-distortion sweep over base steps")
    _add_source_args(p)
    _add_coding_args(p)
    p.add_argument("--steps", type=_floats, default=[8.0, 12.0, 16.0, 24.0, 32.0])
    p.add_argument("--anchor", choices=("none", "no-lookahead", "single-ref"), default="none",
                   help="also sweep an anchor configuration and report BD-rate against it")
    p.add_argument("--out-dir", help="directory for per-step report CSVs")
    _add_csv(p)

    p = sub.add_parser("robustness", help="no-information frame test")
    _add_source_args(p)
    _add_coding_args(p)
    p.add_argument("--corrupt-index", type=int, default=10)
    _add_csv(p)

    p = sub.add_parser("quality-report", help="per-frame PSNR and layer means")
    _add_source_args(p, frames=65)
    _add_coding_args(p)
    p.add_argument("--min-gap", type=float, default=0.1)
    _add_csv(p)

    p = sub.add_parser("schedule", help="print the coding structure as CSV")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--intra-period", type=int, default=-1)
    p.add_argument("--weights", type=_floats, default=None)
    _add_csv(p)

    p = sub.add_parser("synth", help="write a synthetic Y4M sequence")
    p.add_argument("output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=33)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--motion", type=_pair, default=(1, 0))
    p.add_argument("--noise", type=float, default=2.0)
    p.add_argument("--pattern", choices=PATTERNS, default="mixed")
    _add_csv(p)
    return parser


# --- helpers -----------------------------------------------------------------

def _structure(args, n_frames: int) -> StructureConfig:
    kw = {}
    if getattr(args, "weights", None) is not None:
        kw["weights"] = tuple(args.weights)
    return StructureConfig(
        n_frames=n_frames,
        intra_period=args.intra_period,
        base_step=getattr(args, "base_step", 16.0),
        **kw,
    )


def _codec_config(args, n_frames: int) -> CodecConfig:
    return CodecConfig(
        structure=_structure(args, n_frames),
        lookahead_enabled=not args.no_lookahead,
        lookahead_strength=args.lookahead_strength,
        random_omega_seed=args.seed,
        omega_mode=args.omega_mode,
        multi_reference=not args.single_ref,
    )


def _read_y4m(path) -> Sequence:
    return parse_y4m(Path(path).read_bytes())


def _source(args) -> Sequence:
    if args.input:
        return _read_y4m(args.input)
    return gen_synthetic(SyntheticSpec(
        seed=args.synth_seed, width=args.size, height=args.size, n_frames=args.frames,
        motion=args.motion, noise_sigma=args.noise, pattern=args.pattern,
    ))


def _emit(report: ExperimentReport, args) -> None:
    if args.csv:
        report.write(args.csv)


# --- commands ----------------------------------------------------------------

def cmd_encode(args) -> int:
    seq = _read_y4m(args.input)
    res = encode_sequence(seq, _codec_config(args, len(seq)))
    Path(args.output).write_bytes(res.bitstream)
    rep = ExperimentReport.from_encode("encode", res)
    rep.summary["total_bits"] = float(res.total_bits)
    _emit(rep, args)
    print(f"{len(seq)} frames, {res.total_bits} bits, {res.bpp:.4f} bpp, {res.mean_psnr:.2f} dB")
    return EXIT_OK


def cmd_decode(args) -> int:
    data = Path(args.input).read_bytes()
    dec = Decoder(conceal_errors=args.conceal)
    seq = dec.decode(data)
    Path(args.output).write_bytes(write_y4m(seq))
    ref = _read_y4m(args.reference) if args.reference else None
    if ref is not None and (len(ref) != len(seq) or ref.width != seq.width or ref.height != seq.height):
        raise ValueError("reference Y4M does not match the decoded sequence")
    rows = []
    for i, fh in enumerate(dec.frame_headers):
        q = psnr(ref[i], seq[i]) if ref is not None else math.nan
        layer = {0: "Intra", 1: "Key", 2: "High", 3: "Low"}.get(fh.layer, str(fh.layer))
        rows.append(FrameRow(i, "Intra" if fh.frame_type == 0 else "Inter", layer, fh.omega,
                             8 * (FRAME_HEADER.size + fh.payload_len), q, "concealed" if i in dec.concealed else ""))
    rep = ExperimentReport("decode", rows)
    rep.summary["total_bits"] = float(8 * len(data))
    rep.summary["concealed_frames"] = float(len(dec.concealed))
    _emit(rep, args)
    print(f"{len(seq)} frames decoded" + (f", {len(dec.concealed)} concealed" if dec.concealed else ""))
    return EXIT_OK


def cmd_sweep(args) -> int:
    seq = _source(args)
    config = _codec_config(args, len(seq))
    anchor = None
    if args.anchor != "none":
        anchor_cfg = (replace(config, lookahead_enabled=False) if args.anchor == "no-lookahead"
                      else replace(config, multi_reference=False))
        anchor_curve, _ = run_rd_sweep(seq, args.steps, anchor_cfg, name=args.anchor)
        anchor = (args.anchor, anchor_curve)
    curve, reports = run_rd_sweep(seq, args.steps, config, anchor=anchor, out_dir=args.out_dir)
    rep = ExperimentReport("sweep")
    for step, point in zip(args.steps, (r.summary for r in reports)):
        rep.summary[f"step{step:g}_bpp"] = point["bpp"]
        rep.summary[f"step{step:g}_psnr"] = point["mean_psnr"]
    if anchor is not None:
        rep.summary[f"bd_rate_vs_{anchor[0]}"] = bd_rate(anchor[1], curve)
    _emit(rep, args)
    for p in curve:
        print(f"{p.bpp:.5f} bpp  {p.psnr:.3f} dB")
    if anchor is not None:
        print(f"BD-rate vs {anchor[0]}: {rep.summary[f'bd_rate_vs_{anchor[0]}']:+.2f}%")
    return EXIT_OK


def cmd_robustness(args) -> int:
    seq = _source(args)
    rep = run_no_information_test(seq, args.corrupt_index, _codec_config(args, len(seq)))
    _emit(rep, args)
    s = rep.summary
    if "recovery_gap_db" in s:
        print(f"recovery frames {int(s['recovery_first'])}-{int(s['recovery_last'])}: "
              f"{s['recovery_mean_psnr']:.2f} dB vs clean {s['clean_recovery_mean_psnr']:.2f} dB "
              f"(gap {s['recovery_gap_db']:.2f} dB)")
    else:
        print(s["note"])
    return EXIT_OK


def cmd_quality_report(args) -> int:
    seq = _source(args)
    rep = run_quality_structure_report(seq, _codec_config(args, len(seq)), min_gap=args.min_gap)
    _emit(rep, args)
    s = rep.summary
    for layer in ("key", "high", "low"):
        if f"mean_psnr_{layer}" in s:
            print(f"{layer:>4}: {s[f'mean_psnr_{layer}']:.3f} dB")
    print(f"ordering: {s['ordering']}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    text = schedule_to_csv(build_schedule(_structure(args, args.frames)))
    sys.stdout.write(text)
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8", newline="")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SyntheticSpec(seed=args.seed, width=args.width, height=args.height, n_frames=args.frames,
                         motion=args.motion, noise_sigma=args.noise, pattern=args.pattern)
    Path(args.output).write_bytes(write_y4m(gen_synthetic(spec)))
    if args.csv:
        rep = ExperimentReport("synth")
        for k in ("seed", "width", "height", "n_frames", "noise_sigma"):
            rep.summary[k] = float(getattr(spec, k))
        rep.summary["motion"] = f"{spec.motion[0]},{spec.motion[1]}"
        rep.summary["pattern"] = spec.pattern
        _emit(rep, args)
    return EXIT_OK


COMMANDS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "sweep": cmd_sweep,
    "robustness": cmd_robustness,
    "quality-report": cmd_quality_report,
    "schedule": cmd_schedule,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (BitstreamError, Y4MError, ValueError, OSError) as exc:
        print(f"hiervc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
