"""Serve a trained checkpoint over the evaluation harness line protocol.

Per frame the peer sends FRAME <id> <n> <n-k>, a line of n reliabilities,
and a line of n-k syndrome bits; we answer EPAT <id> and n pattern bits.
Runs until EOF or QUIT.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
import torch

from .models import infer_bits, make_inputs
from .train import load_checkpoint


def serve(model, infile, outfile) -> None:
    while True:
        head = infile.readline()
        if not head:
            return
        head = head.strip()
        if not head:
            continue
        if head == "QUIT":
            return
        parts = head.split()
        if len(parts) != 4 or parts[0] != "FRAME":
            raise ValueError(f"malformed request line {head!r}")
        fid, n, nk = int(parts[1]), int(parts[2]), int(parts[3])
        reliab = np.array([float(v) for v in infile.readline().split()],
                          dtype=np.float32)
        s = np.array([int(b) for b in infile.readline().split()],
                     dtype=np.uint8)
        if len(reliab) != n or len(s) != nk:
            raise ValueError(f"frame {fid}: expected {n}+{nk} values, got "
                             f"{len(reliab)}+{len(s)}")
        x = make_inputs(reliab[None, :], s[None, :])
        bits = infer_bits(model, torch.from_numpy(x))[0].numpy()
        outfile.write(f"EPAT {fid}\n" + " ".join(str(int(b)) for b in bits)
                      + "\n")
        outfile.flush()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="serve a trained decoder over stdin/stdout")
    parser.add_argument("--checkpoint", required=True)
    args = parser.parse_args(argv)
    model, _, _ = load_checkpoint(args.checkpoint)
    serve(model, sys.stdin, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
