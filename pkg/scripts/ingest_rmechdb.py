#!/usr/bin/env python3
"""Convert an RMechDB export into the reaction line format.

The native download schema is not pinned here; this adapter accepts the two
shapes commonly produced by the distribution site and reports precisely what
failed so the mapping can be adjusted (see docs/rmechdb_adapter.md):

* a text file with one reaction per line, `reactants>>products` with atom
  maps, arrows in a trailing column or embedded after a space/tab;
* a CSV with configurable column names for the mapped reaction SMIRKS and
  the arrow codes.

Output: <out>/{core,specific}_{train,test}.txt in the line grammar
`reactants >> products | arrow;arrow [| category]`.  Lines that fail to
parse are quarantined to <out>/quarantine_<name>.txt with their errors
rather than dropped silently.
"""

import argparse
import csv
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from radmech.chemgraph import parse_reaction


def convert_line(raw: str, arrow_separator: str) -> str:
    raw = raw.strip()
    if "|" in raw:
        return raw  # already in the target grammar
    if arrow_separator in raw and ">>" in raw:
        body, arrows = raw.split(arrow_separator, 1)
        return f"{body.strip()}|{arrows.strip()}"
    return raw


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", help="native export file")
    parser.add_argument("--out", default="data/rmechdb")
    parser.add_argument("--category", default="core",
                        choices=["core", "specific"])
    parser.add_argument("--split", default="train", choices=["train", "test"])
    parser.add_argument("--reaction-column", default="reaction",
                        help="CSV column holding the mapped SMIRKS")
    parser.add_argument("--arrows-column", default="arrows",
                        help="CSV column holding the arrow codes")
    parser.add_argument("--arrow-separator", default="\t",
                        help="separator between SMIRKS and arrows in text mode")
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    name = f"{args.category}_{args.split}"
    out_path = os.path.join(args.out, f"{name}.txt")
    quarantine_path = os.path.join(args.out, f"quarantine_{name}.txt")

    raw_lines = []
    if args.source.endswith(".csv"):
        with open(args.source, newline="") as fh:
            for row in csv.DictReader(fh):
                if args.reaction_column not in row:
                    sys.exit(f"CSV lacks column {args.reaction_column!r}; "
                             f"columns: {sorted(row)}")
                arrows = row.get(args.arrows_column, "").strip()
                raw_lines.append(f"{row[args.reaction_column].strip()}|{arrows}")
    else:
        with open(args.source) as fh:
            raw_lines = [line for line in fh if line.strip()]

    kept, failed = 0, 0
    with open(out_path, "w") as out, open(quarantine_path, "w") as quarantine:
        for lineno, raw in enumerate(raw_lines, start=1):
            line = convert_line(raw, args.arrow_separator)
            try:
                parse_reaction(line)
            except Exception as exc:
                failed += 1
                quarantine.write(f"# line {lineno}: {exc}\n{raw.strip()}\n")
                continue
            out.write(line + "\n")
            kept += 1
    print(f"{kept} records -> {out_path}")
    if failed:
        print(f"{failed} lines quarantined -> {quarantine_path}")
    else:
        os.unlink(quarantine_path)


if __name__ == "__main__":
    main()
