"""Evaluation reports: a human table on stdout plus a parseable CSV file.

The CSV carries the task, seed, and a config echo as comment lines followed
by one row per evaluated method. Wall-clock time is runtime metadata: it is
shown in the human table but never written to the file, so fixed-seed runs
emit byte-identical reports. Report equality ignores it for the same reason.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import errors

FORMAT_LINE = "# format: eval-report v1"
COLUMNS = ("method", "scope", "count", "accuracy", "u_pathlen", "u_subtreedepth")


@dataclass(frozen=True)
class ReportRow:
    method: str
    scope: str
    count: int
    accuracy: float
    u_pathlen: float | None = None
    u_subtreedepth: float | None = None


class EvalReport:
    def __init__(self, task, rows, config, seed, wall_clock=None):
        self.task = task
        self.rows = list(rows)
        self.config = dict(config)
        self.seed = int(seed)
        self.wall_clock = wall_clock

    def __eq__(self, other):
        if not isinstance(other, EvalReport):
            return NotImplemented
        return (self.task == other.task and self.rows == other.rows
                and self.config == other.config and self.seed == other.seed)

    def __repr__(self):
        return f"EvalReport(task={self.task!r}, rows={len(self.rows)})"

    # -- machine-readable form -------------------------------------------

    def to_csv(self):
        lines = [
            FORMAT_LINE,
            f"# task {self.task}",
            f"# seed {self.seed}",
            f"# config {json.dumps(self.config, sort_keys=True)}",
            ",".join(COLUMNS),
        ]
        for row in self.rows:
            cells = [
                row.method,
                row.scope,
                str(row.count),
                repr(float(row.accuracy)),
                "" if row.u_pathlen is None else repr(float(row.u_pathlen)),
                "" if row.u_subtreedepth is None else repr(float(row.u_subtreedepth)),
            ]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())

    @classmethod
    def parse(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != FORMAT_LINE:
            raise errors.ParseError(path, 1, "not an eval report")
        task = seed = config = None
        body = []
        for lineno, line in enumerate(lines[1:], start=2):
            if line.startswith("# task "):
                task = line[len("# task "):]
            elif line.startswith("# seed "):
                seed = int(line[len("# seed "):])
            elif line.startswith("# config "):
                config = json.loads(line[len("# config "):])
            elif line.startswith("#") or not line.strip():
                continue
            else:
                body.append((lineno, line))
        if task is None or seed is None or config is None:
            raise errors.ParseError(path, 1, "missing task/seed/config header")
        if not body or body[0][1] != ",".join(COLUMNS):
            raise errors.ParseError(path, body[0][0] if body else 1, "missing column header")
        rows = []
        for lineno, line in body[1:]:
            cells = line.split(",")
            if len(cells) != len(COLUMNS):
                raise errors.ParseError(path, lineno, "wrong number of cells")
            rows.append(ReportRow(
                method=cells[0],
                scope=cells[1],
                count=int(cells[2]),
                accuracy=float(cells[3]),
                u_pathlen=float(cells[4]) if cells[4] else None,
                u_subtreedepth=float(cells[5]) if cells[5] else None,
            ))
        return cls(task, rows, config, seed)

    # -- human-readable form ---------------------------------------------

    def to_text(self):
        head = f"task={self.task} seed={self.seed}"
        if self.wall_clock is not None:
            head += f" wall-clock={self.wall_clock:.2f}s"
        lines = [head]
        lines.append(f"{'method':<18} {'scope':<22} {'count':>6} {'acc':>8} "
                     f"{'U_pathlen':>10} {'U_subtree':>10}")
        for row in self.rows:
            upl = "-" if row.u_pathlen is None else f"{row.u_pathlen:.4f}"
            usd = "-" if row.u_subtreedepth is None else f"{row.u_subtreedepth:.4f}"
            lines.append(f"{row.method:<18} {row.scope:<22} {row.count:>6} "
                         f"{row.accuracy:>8.4f} {upl:>10} {usd:>10}")
        return "\n".join(lines)
