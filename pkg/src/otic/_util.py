from __future__ import annotations

import hashlib
import json
import re
from typing import Any

_TRAILING_NUM = re.compile(r"^(.*?)(\d+)$")


def natural_key(ident: str) -> tuple:
    """Sort key ordering ``sw2`` before ``sw10``; also splits ``sw1:p12``."""
    parts = []
    for chunk in ident.split(":"):
        m = _TRAILING_NUM.match(chunk)
        parts.append((m.group(1), int(m.group(2))) if m else (chunk, -1))
    return tuple(parts)


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def digest(doc: Any) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()
