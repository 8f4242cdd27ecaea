"""Corpus characterization: length statistics and same-length similarity.

Lines are grouped into buckets of equal length (order preserved).  For a
line at position ``j`` of its bucket, its predecessors at lookback
``q = 1..k`` are the bucket entries ``j - q``; metrics are derived from the
matrix of their similarity scores.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

DEFAULT_PSL_WINDOWS = (32, 16, 8, 4, 2)


@dataclass
class CharacterizationReport:
    name: str
    size_bytes: int
    lines: int
    al: float
    ndl: int
    rdl: float
    psl: dict = field(default_factory=dict)
    seq: float | None = None
    rev: float | None = None
    mss: float | None = None
    an: float | None = None
    theta: float = 0.85
    search_k: int = 32

    def to_dict(self) -> dict:
        d = asdict(self)
        d["psl"] = {str(k): v for k, v in self.psl.items()}
        return d

    def table_row(self) -> dict:
        """Row for CSV output: one column per statistic, percentages to one decimal."""

        def pct(v):
            return "" if v is None else f"{100 * v:.1f}"

        def num(v):
            return "" if v is None else f"{v:.0f}"

        row = {
            "Dataset": self.name,
            "Size (MB)": f"{self.size_bytes / 1e6:.2f}",
            "Lines": self.lines,
            "AL": f"{self.al:.0f}",
            "NDL": self.ndl,
            "RDL (%)": f"{100 * self.rdl:.4f}",
        }
        for k in sorted(self.psl, reverse=True):
            row[f"PSL k={k} (%)"] = pct(self.psl[k])
        row.update({"Seq": num(self.seq), "Rev": num(self.rev), "MSS (%)": pct(self.mss), "AN": num(self.an)})
        return row


def reports_to_csv(reports) -> str:
    rows = [r.table_row() for r in reports]
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _require(lines):
    if not lines:
        raise ValueError("corpus is empty")


def basic_stats(lines) -> tuple[float, int, float]:
    """Mean length, number of distinct lengths, and their ratio to the line count."""
    _require(lines)
    lengths = [len(line) for line in lines]
    n = len(lengths)
    ndl = len(set(lengths))
    return sum(lengths) / n, ndl, ndl / n


def lookback_similarity(lines, k: int) -> np.ndarray:
    """Similarity of each line to its same-length predecessors.

    Returns an ``(n, k)`` float array whose column ``q - 1`` holds the score
    against lookback ``q``; NaN where that predecessor does not exist.
    """
    n = len(lines)
    sims = np.full((n, k), np.nan)
    lengths = np.fromiter((len(line) for line in lines), np.int64, n)
    order = np.argsort(lengths, kind="stable")
    bounds = np.flatnonzero(np.diff(lengths[order])) + 1
    for idx in np.split(order, bounds):
        size = len(idx)
        if size < 2:
            continue
        width = int(lengths[idx[0]])
        if width == 0:
            for q in range(1, min(k, size - 1) + 1):
                sims[idx[q:], q - 1] = 1.0
            continue
        block = np.frombuffer(b"".join(lines[i] for i in idx), np.uint8).reshape(size, width)
        for q in range(1, min(k, size - 1) + 1):
            eq = np.count_nonzero(block[q:] == block[:-q], axis=1)
            sims[idx[q:], q - 1] = eq / width
    return sims


def _psl_from(sims, k, theta) -> float:
    with np.errstate(invalid="ignore"):
        hit = (sims[:, :k] >= theta).any(axis=1)
    return int(hit.sum()) / sims.shape[0]


def _probes_from(sims, k, theta):
    sims = sims[:, :k]
    avail = (~np.isnan(sims)).sum(axis=1)
    with np.errstate(invalid="ignore"):
        hit = sims >= theta
    any_hit = hit.any(axis=1)
    # newest first: first hit column + 1
    rev = np.where(any_hit, hit.argmax(axis=1) + 1, k)
    # oldest available first: avail - (largest hit lookback) + 1
    last_hit = k - 1 - hit[:, ::-1].argmax(axis=1)
    seq = np.where(any_hit, avail - last_hit, k)
    eligible = avail > 0
    return np.where(eligible, seq, 0), np.where(eligible, rev, 0)


def _search_from(sims, k, theta, include_nopred):
    seq, rev = _probes_from(sims, k, theta)
    eligible = seq > 0
    if include_nopred:
        seq = np.where(eligible, seq, k)
        rev = np.where(eligible, rev, k)
        eligible = np.ones_like(eligible)
    if not eligible.any():
        return None, None
    count = int(eligible.sum())
    return int(seq[eligible].sum()) / count, int(rev[eligible].sum()) / count


def _mss_from(sims, k, include_nopred):
    sims = sims[:, :k]
    eligible = ~np.isnan(sims[:, 0])
    if not eligible.any():
        return None, None
    sub = np.where(np.isnan(sims[eligible]), -1.0, sims[eligible])
    best = sub.max(axis=1)
    an = sub.argmax(axis=1) + 1
    count = int(eligible.sum())
    mss = math.fsum(best.tolist()) / count
    an_total = int(an.sum())
    if include_nopred:
        missing = sims.shape[0] - count
        return mss, (an_total + k * missing) / sims.shape[0]
    return mss, an_total / count


def psl(lines, k: int, theta: float = 0.85) -> float:
    """Share of lines with a same-length predecessor within ``k`` scoring >= ``theta``."""
    _require(lines)
    return _psl_from(lookback_similarity(lines, k), k, theta)


def probe_counts(lines, k: int = 32, theta: float = 0.85):
    """Per-line (Seq, Rev) probe counts; 0 for lines without a same-length predecessor."""
    _require(lines)
    return _probes_from(lookback_similarity(lines, k), k, theta)


def search_counts(lines, k: int = 32, theta: float = 0.85, include_nopred: bool = False):
    """Mean probes to reach ``theta`` scanning oldest-first (Seq) and newest-first (Rev)."""
    _require(lines)
    return _search_from(lookback_similarity(lines, k), k, theta, include_nopred)


def mss_an(lines, k: int = 32, include_nopred: bool = False):
    """Mean best similarity in the window and mean newest-first probes to first reach it."""
    _require(lines)
    return _mss_from(lookback_similarity(lines, k), k, include_nopred)


def characterize(lines, psl_windows=DEFAULT_PSL_WINDOWS, theta: float = 0.85, search_k: int = 32,
                 name: str = "", size_bytes: int | None = None,
                 include_nopred: bool = False) -> CharacterizationReport:
    _require(lines)
    al, ndl, rdl = basic_stats(lines)
    kmax = max([search_k, *psl_windows])
    sims = lookback_similarity(lines, kmax)
    seq, rev = _search_from(sims, search_k, theta, include_nopred)
    mss, an = _mss_from(sims, search_k, include_nopred)
    if size_bytes is None:
        size_bytes = sum(len(line) + 1 for line in lines)
    return CharacterizationReport(
        name=name,
        size_bytes=size_bytes,
        lines=len(lines),
        al=al,
        ndl=ndl,
        rdl=rdl,
        psl={k: _psl_from(sims, k, theta) for k in psl_windows},
        seq=seq,
        rev=rev,
        mss=mss,
        an=an,
        theta=theta,
        search_k=search_k,
    )
