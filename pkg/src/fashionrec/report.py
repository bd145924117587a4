"""HTML pages: the rating gallery shown to raters and the score tables."""

from __future__ import annotations

import html
import logging
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

N_COLUMNS = 10

_STYLE = """
body { font-family: sans-serif; margin: 1em; }
table { border-collapse: collapse; margin-bottom: 1.5em; }
td, th { border: 1px solid #bbb; padding: 2px 6px; }
td.tile img, td.tile div { width: 64px; height: 96px; object-fit: cover; }
td.tile div { background: #ddd; color: #777; font-size: 10px; }
"""


@dataclass
class GalleryRow:
    label: str          # algorithm name; shown to raters only as "Row n"
    items: list[str]


@dataclass
class GalleryQuery:
    query_id: str
    rows: list[GalleryRow]


def gallery(
    retrievals: Mapping[str, Mapping[str, Sequence[str]]],
    seed: int = 0,
    n_columns: int = N_COLUMNS,
) -> list[GalleryQuery]:
    """Arrange ``retrievals[query_id][algorithm] -> item ids`` into grids.

    Row order is shuffled per query with a generator seeded by ``seed`` so
    raters cannot tell which algorithm produced which row.
    """
    rng = np.random.default_rng(seed)
    out = []
    for qid in sorted(retrievals):
        algos = sorted(retrievals[qid])
        order = rng.permutation(len(algos))
        rows = [GalleryRow(algos[i], list(retrievals[qid][algos[i]])[:n_columns]) for i in order]
        out.append(GalleryQuery(qid, rows))
    return out


def _tile(item_id: str, image_paths: Mapping[str, str], base_dir: str | None) -> str:
    path = image_paths.get(item_id)
    full = path if path is None or base_dir is None or os.path.isabs(path) else os.path.join(base_dir, path)
    if path is None or not os.path.exists(full):
        log.warning("no image for %s; using a placeholder tile", item_id)
        return f'<td class="tile"><div>{html.escape(item_id)}</div></td>'
    return f'<td class="tile"><img src="{html.escape(path)}" alt="{html.escape(item_id)}"></td>'


def render_gallery(
    grids: Sequence[GalleryQuery],
    image_paths: Mapping[str, str],
    seed: int,
    base_dir: str | None = None,
    n_columns: int = N_COLUMNS,
) -> str:
    parts = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'><title>Recommendation gallery</title>",
        f"<style>{_STYLE}</style></head><body>",
        f"<h1>Recommendation gallery</h1><p>{len(grids)} queries; row order seed = {seed}</p>",
    ]
    for g in grids:
        parts.append(f"<h2>Query {html.escape(g.query_id)}</h2><table>")
        parts.append("<tr><th>query</th>" + _tile(g.query_id, image_paths, base_dir) + "</tr>")
        for r, row in enumerate(g.rows, start=1):
            cells = [_tile(i, image_paths, base_dir) for i in row.items]
            cells += ['<td class="tile"><div></div></td>'] * (n_columns - len(cells))
            parts.append(f"<tr><th>Row {r}</th>{''.join(cells)}</tr>")
        parts.append("</table>")
    parts.append("</body></html>")
    return "\n".join(parts)


def render_scores(stats: dict, agreement: dict | None = None) -> str:
    """Score tables (raw, mean and normalised per algorithm) as HTML."""
    rows = "".join(
        f"<tr><td>{html.escape(a)}</td><td>{_fmt(stats['raw_scores'][a])}</td>"
        f"<td>{_fmt(stats['mean_scores'][a])}</td><td>{_fmt(stats['normalized_scores'][a])}</td></tr>"
        for a in stats["algorithms"]
    )
    body = [
        "<!DOCTYPE html><html><head><meta charset='utf-8'><title>Algorithm scores</title>",
        f"<style>{_STYLE}</style></head><body><h1>Algorithm scores</h1>",
        f"<p>agreement threshold = {_fmt(stats['threshold'])}; queries = {stats['n_queries']}; "
        f"excluded (no rater retained) = {len(stats['excluded_queries'])}</p>",
        "<table><tr><th>algorithm</th><th>raw</th><th>mean rating</th><th>normalised</th></tr>",
        rows,
        "</table>",
    ]
    if agreement:
        for title, key in (("Retained raters per query", "retained"), ("Agreed rating values", "agreed_ratings")):
            body.append(f"<h2>{title}</h2>")
            for cls, hist in agreement[key].items():
                cells = "".join(f"<tr><td>{html.escape(str(k))}</td><td>{v}</td></tr>" for k, v in hist.items())
                body.append(f"<h3>{html.escape(cls)}</h3><table>{cells}</table>")
    body.append("</body></html>")
    return "\n".join(body)


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def row_key(grids: Sequence[GalleryQuery]) -> dict[str, list[str]]:
    """query id -> algorithm shown in each row, for de-randomising ratings."""
    return {g.query_id: [r.label for r in g.rows] for g in grids}
