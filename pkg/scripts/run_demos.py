"""Run the discretized function-space demos and write a JSON report."""

import argparse
import json
import sys

from conewise.demos import demos_all


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args(argv)
    rep = demos_all(seed=args.seed)
    json.dump(rep.to_dict(), args.out, indent=2, sort_keys=True)
    args.out.write("\n")
    for row in rep.rows:
        print(f"{row['case']:<18} {row['verdict']}", file=sys.stderr)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
