#!/usr/bin/env python3
"""Convert a discrete BIF network into the abdiv Bayesian-network JSON format.

Each CPT row is renormalized to sum to one; the largest correction is printed.
"""

import argparse
import itertools
import json
import re
import sys

VARIABLE = re.compile(r"variable\s+(\S+)\s*\{\s*type\s+discrete\s*\[\s*\d+\s*\]\s*\{([^}]*)\}", re.S)
PROBABILITY = re.compile(r"probability\s*\(\s*([^|)]+?)\s*(?:\|\s*([^)]*))?\)\s*\{([^}]*)\}", re.S)


def split_names(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def parse(text):
    states = {m.group(1): split_names(m.group(2)) for m in VARIABLE.finditer(text)}
    order = [m.group(1) for m in VARIABLE.finditer(text)]
    nodes = []
    max_fix = 0.0
    for m in PROBABILITY.finditer(text):
        child = m.group(1).strip()
        parents = split_names(m.group(2) or "")
        rows = {}
        for line in m.group(3).split(";"):
            line = line.strip()
            if not line:
                continue
            if line.startswith("table"):
                rows[()] = [float(x) for x in split_names(line[len("table"):])]
                continue
            key, values = re.match(r"\(([^)]*)\)\s*(.*)", line, re.S).groups()
            rows[tuple(split_names(key))] = [float(x) for x in split_names(values)]
        cpt = []
        for combo in itertools.product(*(states[p] for p in parents)):
            row = rows[tuple(combo)]
            total = sum(row)
            max_fix = max(max_fix, abs(total - 1.0))
            cpt.extend(v / total for v in row)
        nodes.append({"name": child, "parents": parents, "cpt": cpt})
    variables = [{"name": v, "card": len(states[v]), "states": states[v]} for v in order]
    return {"variables": variables, "nodes": nodes}, max_fix


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("bif")
    parser.add_argument("out")
    args = parser.parse_args()
    with open(args.bif) as f:
        doc, max_fix = parse(f.read())
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
    print(f"{len(doc['nodes'])} nodes; largest row renormalization {max_fix:.3g}", file=sys.stderr)


if __name__ == "__main__":
    main()
