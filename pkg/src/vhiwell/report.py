"""Deterministic CSV emission.

Every table starts with a comment header block (tool version, canonical
config echo, seed) followed by a column row and data rows.  Floats are
rendered with repr (shortest round-trip decimal), so identical config plus
seed yields byte-identical output.  Comma separator, dot decimal, UTF-8,
LF line endings.
"""

from __future__ import annotations

import json
from typing import Iterable, Optional, Sequence

from . import __version__


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence],
               config: Optional[dict] = None, seed: Optional[int] = None) -> str:
    lines = [f"# vhiwell {__version__}"]
    if config is not None:
        lines.append("# config: " + json.dumps(config, sort_keys=True))
    if seed is not None:
        lines.append(f"# seed: {seed}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence],
              config: Optional[dict] = None, seed: Optional[int] = None) -> str:
    text = render_csv(columns, rows, config=config, seed=seed)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text
