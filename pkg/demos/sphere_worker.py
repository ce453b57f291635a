#!/usr/bin/env python3
"""Reference external-objective worker: sphere over NDJSON stdin/stdout."""
import json
import sys

for line in sys.stdin:
    x = json.loads(line)["x"]
    print(json.dumps({"y": sum(v * v for v in x)}), flush=True)
