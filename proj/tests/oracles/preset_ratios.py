#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Whole-model / largest single-pass weight bytes for each preset, from the shapes alone,
compared exactly against what `epur gen-network --report` says."""

import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

# name: (layers, neurons, directions, peephole, input_dim, bytes per value)
PRESETS = {
    "BYSDNE": (5, 512, 1, True, 512, 4),
    "RLDRADSPR": (10, 1024, 1, True, 1024, 2),
    "EESEN": (5, 320, 2, True, 120, 4),
    "LDLRNN": (2, 128, 1, False, 128, 4),
    "GMAT": (17, 1024, 1, False, 1024, 2),
}


def pass_values(inputs, hidden, peephole):
    gates = 4 * (hidden * inputs + hidden * hidden + hidden)
    return gates + (3 * hidden if peephole else 0)


def analytic(layers, hidden, dirs, peephole, input_dim, elem):
    passes = []
    inputs = input_dim
    for _ in range(layers):
        passes += [pass_values(inputs, hidden, peephole) * elem] * dirs
        inputs = hidden * dirs
    return sum(passes), max(passes)


def main(tool):
    failed = 0
    logs = []
    with tempfile.TemporaryDirectory() as tmp:
        for name, shape in PRESETS.items():
            path = Path(tmp) / f"{name}.json"
            subprocess.run([tool, "gen-network", "--preset", name, "--report", str(path)],
                           check=True, stdout=subprocess.DEVNULL)
            rep = json.loads(path.read_text())
            total, largest = analytic(*shape)
            want = total / largest
            got = rep["single_layer_ratio"]
            ok = (got == want and rep["total_weight_bytes"] == total
                  and rep["max_pass_weight_bytes"] == largest)
            failed += not ok
            logs.append(math.log(got))
            print(f"{'ok ' if ok else 'BAD'} {name:10s} tool {got:.6f} analytic {want:.6f}")
    print(f"geometric mean {math.exp(sum(logs) / len(logs)):.3f} (published 7x)")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
