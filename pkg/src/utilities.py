import json
from typing import Any, Iterable

OK = "ok"
FAILED = "failed"


def record(kind: str, name: str, status: str = OK, **fields: Any) -> dict:
    """One report line: what was checked, under which name, and how it went."""
    return {"kind": kind, "name": name, "status": status, **fields}


def failed(records: Iterable[dict]) -> bool:
    return any(r.get("status") == FAILED for r in records)


def format_record(rec: dict) -> str:
    mark = "✓" if rec.get("status") != FAILED else "✗"
    text = f"{mark} {rec['kind']} {rec['name']}"
    detail = rec.get("message") or rec.get("summary")
    if detail:
        text += f": {detail}"
    return text


def render_report(records: list[dict]) -> str:
    """JSON lines first, then the human-readable lines."""
    lines = [json.dumps(r, sort_keys=True, default=str) for r in records]
    lines.append("")
    lines.extend(format_record(r) for r in records)
    return "\n".join(lines) + "\n"
