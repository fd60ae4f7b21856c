#!/usr/bin/env python3
"""Checks exported path queries with z3 against the built-in solver's answers."""
import pathlib
import subprocess
import sys

import z3


def main():
    exporter, corpus, out = sys.argv[1], sys.argv[2], pathlib.Path(sys.argv[3])
    count = sys.argv[4] if len(sys.argv) > 4 else "100"
    subprocess.run([exporter, corpus, str(out), count], check=True)
    tally = {}
    bad = []
    for line in (out / "manifest.txt").read_text().splitlines():
        name, ours = line.split()
        s = z3.Solver()
        s.set("timeout", 20000)
        s.add(z3.parse_smt2_file(str(out / name)))
        theirs = str(s.check())
        key = (ours, theirs)
        tally[key] = tally.get(key, 0) + 1
        if (ours, theirs) in (("Sat", "unsat"), ("Unsat", "sat")):
            bad.append(f"{name}: ours {ours}, z3 {theirs}")
    for (ours, theirs), n in sorted(tally.items()):
        print(f"{n:6d}  ours {ours:7s} z3 {theirs}")
    for b in bad:
        print("MISMATCH", b)
    decided = sum(n for (o, t), n in tally.items() if o != "Unknown" and t != "unknown")
    if bad or decided == 0:
        return 1
    if not any(o == "Sat" for o, _ in tally) or not any(o == "Unsat" for o, _ in tally):
        print("expected both Sat and Unsat queries")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
