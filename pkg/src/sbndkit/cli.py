"""Command-line front end.

Subcommands: code, build, eval, stats, serve. Flags can be preloaded from a
key=value config file (--config); explicit flags win. Every run logs its
resolved configuration and master seed so it can be replayed exactly.

Exit codes: 0 success, 2 usage, 3 data/invariant error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import dataset as ds
from .channel import ChannelParams
from .codes import (PRIMITIVE_POLY, CodeError, bch_code, load_code_file,
                    save_code_file)
from .dataset import BuildSpec, DatasetError
from .harness import (BridgeError, HardDecisionStub, MldDecoder, OsdDecoder,
                      PipeBridgeDecoder, RunStop, TcpBridgeDecoder,
                      fer_csv_export, run_fer, serve_decoders,
                      syndrome_osd_handler)

log = logging.getLogger("sbndkit")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4

METHOD_NAMES = {"chan": ds.METHOD_CHAN, "uniw": ds.METHOD_UNIFORM_WEIGHT,
                "is": ds.METHOD_IMPORTANCE, "unis": ds.METHOD_UNIFORM_SYNDROME}
TARGET_NAMES = {"chan": ds.TARGET_CHAN, "ml": ds.TARGET_ML}


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SBND_THREADS")
    return int(env) if env else 1


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def _load_config(path) -> dict:
    # values become argparse defaults, which skip type= conversion: coerce here
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            out[key.strip().replace("-", "_")] = _coerce(val.strip())
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sbndkit",
                                description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value file with flag defaults")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("code", help="construct a code and write its definition")
    c.add_argument("--family", choices=["bch"], default="bch")
    c.add_argument("--m", type=int, choices=sorted(PRIMITIVE_POLY),
                   required=True, help="field degree")
    c.add_argument("--t", type=int, required=True,
                   help="designed error-correcting capability")
    c.add_argument("--out", help="code definition file to write")

    b = sub.add_parser("build", help="build a training dataset")
    b.add_argument("--code", required=True, help="code definition file")
    b.add_argument("--snr-db", type=float, required=True)
    b.add_argument("--method", choices=sorted(METHOD_NAMES), required=True)
    b.add_argument("--target", choices=sorted(TARGET_NAMES), default="ml")
    b.add_argument("--count", type=int, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--wmax", type=int, default=0)
    b.add_argument("--store-chan", action="store_true",
                   help="store e_chan next to the target in every record")
    b.add_argument("--chunk-size", type=int, default=4096)
    b.add_argument("--max-attempts", type=int, default=0,
                   help="transmission budget before aborting on starvation")
    b.add_argument("--threads", type=int, default=None)

    e = sub.add_parser("eval", help="Monte Carlo FER/BER sweep")
    e.add_argument("--code", required=True)
    e.add_argument("--decoder", choices=["osd", "mld", "bridge", "hard"],
                   default="osd")
    e.add_argument("--order", type=int, default=None,
                   help="OSD reprocessing order (default floor(d_min/4))")
    e.add_argument("--snr-list", required=True,
                   help="comma-separated E_b/N_0 values in dB")
    e.add_argument("--min-errors", type=int, default=100)
    e.add_argument("--max-frames", type=int, default=10_000_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True, help="CSV output path")
    e.add_argument("--bridge-cmd", help="command line of the decoder process")
    e.add_argument("--bridge-addr", help="host:port of a decoder server")
    e.add_argument("--bridge-timeout", type=float, default=60.0)
    e.add_argument("--threads", type=int, default=None)

    s = sub.add_parser("stats", help="histograms for an existing dataset")
    s.add_argument("--dataset", required=True)
    s.add_argument("--out", required=True, help="weight histogram CSV")
    s.add_argument("--syndrome-out", help="optional syndrome occupancy CSV")
    s.add_argument("--validate", action="store_true",
                   help="re-check every record invariant")
    s.add_argument("--code", help="code definition file (for --validate)")

    v = sub.add_parser("serve", help="serve a reference decoder over the "
                                     "bridge line protocol (stdin/stdout)")
    v.add_argument("--code", required=True)
    v.add_argument("--decoder", choices=["osd"], default="osd")
    v.add_argument("--order", type=int, default=None)

    p._sbnd_subparsers = [c, b, e, s, v]  # config defaults must reach these
    return p


def _log_config(args):
    skip = {"config", "verbose", "command"}
    pairs = sorted((k, v) for k, v in vars(args).items()
                   if k not in skip and v is not None)
    log.info("command=%s %s", args.command,
             " ".join(f"{k}={v}" for k, v in pairs))


def cmd_code(args) -> int:
    code = bch_code(args.m, args.t)
    log.info("constructed %s (n=%d, k=%d, d_min=%d)", code.name, code.n,
             code.k, code.d_min)
    print(f"{code.name} n={code.n} k={code.k} dmin={code.d_min}")
    if args.out:
        save_code_file(code, args.out)
        log.info("wrote code definition to %s", args.out)
    return EXIT_OK


def cmd_build(args) -> int:
    code = load_code_file(args.code)
    spec = BuildSpec(
        code=code,
        params=ChannelParams.for_code(code, args.snr_db),
        method=METHOD_NAMES[args.method],
        target_kind=TARGET_NAMES[args.target],
        record_count=args.count,
        master_seed=args.seed,
        w_max=args.wmax,
        store_chan=args.store_chan,
        chunk_size=args.chunk_size,
        max_attempts=args.max_attempts,
    )
    report = ds.build_dataset(spec, args.out, workers=_threads(args),
                              stats_path=args.out + ".stats.csv")
    log.info("wrote %d records (%d transmissions) to %s",
             report.records_written, report.transmissions, args.out)
    print(f"records={report.records_written} "
          f"transmissions={report.transmissions} out={args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    code = load_code_file(args.code)
    snrs = [float(v) for v in args.snr_list.replace(",", " ").split()]
    stop = RunStop(min_frame_errors=args.min_errors,
                   max_frames=args.max_frames)
    if args.decoder == "osd":
        decoder = OsdDecoder(code, args.order)
    elif args.decoder == "mld":
        decoder = MldDecoder(code)
    elif args.decoder == "hard":
        decoder = HardDecisionStub(code)
    else:
        if args.bridge_cmd:
            decoder = PipeBridgeDecoder(code, args.bridge_cmd,
                                        timeout=args.bridge_timeout)
        elif args.bridge_addr:
            host, _, port = args.bridge_addr.partition(":")
            decoder = TcpBridgeDecoder(code, host, int(port),
                                       timeout=args.bridge_timeout)
        else:
            raise BridgeError("--decoder bridge needs --bridge-cmd or "
                              "--bridge-addr")
    try:
        results = run_fer(decoder, code, snrs, stop, args.seed,
                          workers=_threads(args))
    finally:
        close = getattr(decoder, "close", None)
        if close:
            close()
    fer_csv_export(results, args.out)
    for r in results:
        print(f"ebn0_db={r.ebn0_db:g} frames={r.frames} "
              f"frame_errors={r.frame_errors} fer={r.fer:.6g} ber={r.ber:.6g}")
    log.info("wrote FER curve to %s", args.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    if args.validate:
        code = load_code_file(args.code) if args.code else None
        info = ds.validate_dataset(args.dataset, code)
        log.info("validated %s: %s", args.dataset, info)
    stats = ds.dataset_stats(args.dataset)
    ds.write_weight_csv(stats.weight_hist, args.out)
    if args.syndrome_out:
        ds.write_syndrome_csv(stats.syndrome_hist, args.syndrome_out)
    total = int(stats.weight_hist.sum())
    top = int(np.argmax(stats.weight_hist))
    print(f"records={total} modal_weight={top} "
          f"wl_mean={stats.wl_mean:.4f} syndromes={len(stats.syndrome_hist)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    code = load_code_file(args.code)
    handler = syndrome_osd_handler(code, args.order)
    serve_decoders(handler, sys.stdin, sys.stdout)
    return EXIT_OK


COMMANDS = {"code": cmd_code, "build": cmd_build, "eval": cmd_eval,
            "stats": cmd_stats, "serve": cmd_serve}


def main(argv=None) -> int:
    parser = build_parser()
    # pre-scan for --config so file values become defaults, flags still win
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        try:
            defaults = _load_config(pre.config)
        except OSError as exc:
            print(f"cannot read config file: {exc}", file=sys.stderr)
            return EXIT_IO
        parser.set_defaults(**defaults)
        for sp in parser._sbnd_subparsers:  # subparsers use fresh namespaces
            sp.set_defaults(**defaults)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    _log_config(args)
    try:
        return COMMANDS[args.command](args)
    except (CodeError, DatasetError, BridgeError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
