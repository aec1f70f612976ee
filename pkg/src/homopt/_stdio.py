"""One-shot JSON-over-stdio exchange with a child process."""
from __future__ import annotations

import json
import shlex
import subprocess


class ProtocolError(RuntimeError):
    pass


def exchange(command, payload: dict, timeout: float | None) -> dict:
    """Spawn ``command``, send ``payload`` as one JSON line, parse the first stdout line."""
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    try:
        proc = subprocess.run(
            argv,
            input=json.dumps(payload) + "\n",
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        raise ProtocolError(f"{argv[0]}: timed out after {timeout}s") from None
    except OSError as exc:
        raise ProtocolError(f"{argv[0]}: could not start ({exc})") from exc
    if proc.returncode != 0:
        tail = proc.stderr.strip().splitlines()[-1:] or [""]
        raise ProtocolError(f"{argv[0]}: exit status {proc.returncode} {tail[0]}".rstrip())
    lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
    if not lines:
        raise ProtocolError(f"{argv[0]}: no output")
    try:
        reply = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"{argv[0]}: malformed reply ({exc})") from exc
    if not isinstance(reply, dict):
        raise ProtocolError(f"{argv[0]}: reply must be a JSON object")
    return reply
