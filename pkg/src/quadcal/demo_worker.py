"""Reference worker for the subprocess model protocol.

Run as ``python3 -m quadcal.demo_worker [--mode echo|sum|nan]``:
  echo  - returns each point unchanged (output_dim = dimension)
  sum   - returns the coordinate sum (output_dim = 1)
  nan   - returns NaN for every point (protocol-violation fixture)
"""

from __future__ import annotations

import argparse
import json
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mode", choices=("echo", "sum", "nan"), default="echo")
    args = parser.parse_args(argv)

    dimension = None
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        message = json.loads(line)
        if "hello" in message:
            dimension = int(message["hello"]["dimension"])
            output_dim = 1 if args.mode == "sum" else dimension
            print(json.dumps({"ok": {"output_dim": output_dim}}), flush=True)
        elif "eval" in message:
            points = message["eval"]["points"]
            if args.mode == "echo":
                values = points
            elif args.mode == "sum":
                values = [[sum(p)] for p in points]
            else:
                values = [[float("nan")] * dimension for _ in points]
            reply = {"result": {"id": message["eval"]["id"], "values": values}}
            print(json.dumps(reply), flush=True)
        elif "bye" in message:
            return 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
