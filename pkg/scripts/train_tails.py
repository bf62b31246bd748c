#!/usr/bin/env python3
"""Train the desk-scale network over several batch sizes and watch the
gradient-noise tail index.  --quick cuts everything down for a smoke run."""
import argparse

from levylab.datasets import synthetic_blobs
from levylab.mlp import init_mlp
from levylab.rng import RngStream
from levylab.training import train_log_header, train_with_tail_logging

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--quick", action="store_true")
args = parser.parse_args()

N, DIM, CLASSES, SPREAD = 8000, 20, 10, 2.0
WIDTH, DEPTH = 128, 3
ETA = 0.1
ITERS, LOG_EVERY = 1001, 250
BATCHES = (50, 100, 200)
if args.quick:
    N, WIDTH, ITERS, LOG_EVERY, BATCHES = 1000, 32, 101, 50, (50, 100)

data = synthetic_blobs(N, DIM, CLASSES, SPREAD, RngStream(260))
finals = {}
for j, b in enumerate(BATCHES):
    sizes = (DIM, *([WIDTH] * (DEPTH - 1)), CLASSES)
    model = init_mlp(sizes, RngStream(261 + j))
    rows = train_with_tail_logging(
        model, data, b, ETA, ITERS, "nll", RngStream(270 + j), log_every=LOG_EVERY
    )
    print(f"--- b = {b}")
    print(train_log_header(DEPTH))
    for row in rows:
        print(row.csv_row())
    finals[b] = rows[-1].alpha_whole

print("final whole-network alpha_hat by batch size:")
for b, a in finals.items():
    print(f"  b={b}: {a:.3f}")
