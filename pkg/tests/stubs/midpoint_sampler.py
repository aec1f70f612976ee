"""Sampler stub: proposes the midpoint of every continuous parameter."""
import json
import sys

msg = json.loads(sys.stdin.readline())
out = {p["name"]: (p["lo"] + p["hi"]) / 2 for p in msg["space"]}
print(json.dumps({"params": out, "seen": len(msg["history"])}))
