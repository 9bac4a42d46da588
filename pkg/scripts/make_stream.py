#!/usr/bin/env python3
"""Write a seeded synthetic event stream as line-delimited JSON.

Useful for `feedgate replay --file ...` and for feeding the live gateway:

    python scripts/make_stream.py --rate 200 --duration 60 --burst > events.jsonl
    feedgate serve --port 8765 --source file:events.jsonl
"""

import argparse
import sys

from feedgate.wire import event_to_line
from feedgate.workload import BurstSpec, WorkloadSpec, generate_stream


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rate", type=float, default=200.0)
    parser.add_argument("--duration", type=float, default=60.0)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--burst", action="store_true", help="inject a same-key login-failure burst")
    args = parser.parse_args()

    spec = WorkloadSpec(
        rate_eps=args.rate,
        duration_s=args.duration,
        seed=args.seed,
        burst=BurstSpec(rate_multiplier=25.0, duration_s=min(10.0, args.duration / 3))
        if args.burst
        else None,
    )
    try:
        for ev in generate_stream(spec):
            sys.stdout.write(event_to_line(ev) + "\n")
    except BrokenPipeError:
        sys.stderr.close()


if __name__ == "__main__":
    main()
