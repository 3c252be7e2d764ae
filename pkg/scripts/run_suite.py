"""Run the verification battery and write its JSON report.

    python3 scripts/run_suite.py --size full --seed 0 --output suite.json
"""

import argparse
import json
import sys
import time

from betacurv.cli import jsonable
from betacurv.suite import run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", choices=("smoke", "full"), default="full")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", default=None)
    args = ap.parse_args()

    t0 = time.perf_counter()
    report = run_suite(args.seed, args.size)
    for check in report["checks"]:
        print(f"{'ok  ' if check['passed'] else 'FAIL'} {check['name']}", file=sys.stderr)
    print(f"{report['passed']} passed, {report['failed']} failed in {time.perf_counter() - t0:.1f}s", file=sys.stderr)

    text = json.dumps(jsonable(report), indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["failed"] == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
