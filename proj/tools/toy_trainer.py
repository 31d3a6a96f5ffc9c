#!/usr/bin/env python3
"""Stand-in for a training job speaking the evaluator protocol.

Reads one request line {"id": ..., "params": {...}} from stdin and answers
{"id": ..., "objective": ...}. The "accuracy" is a smooth made-up function of
the decoded hyperparameters, peaking near lr=1e-2.5 and ~2 layers of ~200.
"""
import json
import math
import sys

req = json.loads(sys.stdin.readline())
p = req["params"]
score = 0.95
lr = p.get("learning_rate")
if lr is not None:
    score -= 0.05 * (math.log10(lr) + 2.5) ** 2
layers = p.get("hidden", [])
score -= 0.02 * (len(layers) - 2) ** 2
for size in layers:
    score -= 0.01 * ((size - 200) / 200.0) ** 2
if p.get("activation") == "linear":
    score -= 0.1
print(json.dumps({"id": req["id"], "objective": score}), flush=True)
