"""Corpus evaluation and text rendering of score tables."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Mapping, Sequence

from .metrics import (
    EmbeddingTable, bert_score, mover_score, meteor, novel_ngrams, mark_novel, rouge_l, rouge_lsum, rouge_n,
)
from .published import COLUMNS
from .textcore import tokenize

log = logging.getLogger(__name__)

HEADERS = {
    "rouge1": "ROUGE-1", "rouge2": "ROUGE-2", "rougeL": "ROUGE-L", "rougeLsum": "ROUGE-Lsum",
    "meteor": "METEOR", "bertscore": "BERTScore", "moverscore": "MoverScore",
}


class ReportError(ValueError):
    pass


def score_pair(cand: str, ref: str, emb: EmbeddingTable | None = None, use_idf: bool = False) -> dict[str, float]:
    """All metrics for one candidate/reference pair, as fractions in [0, 1]."""
    c, r = tokenize(cand), tokenize(ref)
    row = {
        "rouge1": rouge_n(c, r, 1).f1,
        "rouge2": rouge_n(c, r, 2).f1,
        "rougeL": rouge_l(c, r).f1,
        "rougeLsum": rouge_lsum(cand, ref).f1,
        "meteor": meteor(c, r),
    }
    if emb is not None:
        if c and r:
            row["bertscore"] = bert_score(c, r, emb, use_idf).f1
            row["moverscore"] = mover_score(c, r, emb)
        else:
            row["bertscore"] = row["moverscore"] = 0.0
    return row


def _score_args(args):
    return score_pair(*args)


def evaluate(outputs: Mapping[str, str], references: Mapping[str, str], emb: EmbeddingTable | None = None,
             use_idf: bool = False, jobs: int = 1) -> dict[str, float]:
    """Mean per-example scores in percent, over ids in sorted order."""
    missing = sorted(set(references) - set(outputs))
    extra = sorted(set(outputs) - set(references))
    if missing or extra:
        raise ReportError(f"id mismatch: missing outputs for {missing}; outputs without reference {extra}")
    if not outputs:
        raise ReportError("nothing to evaluate")
    ids = sorted(outputs)
    work = [(outputs[i], references[i], emb, use_idf) for i in ids]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_score_args, work, chunksize=8))
    else:
        rows = [_score_args(w) for w in work]
    return {k: 100.0 * sum(r[k] for r in rows) / len(rows) for k in COLUMNS if k in rows[0]}


def validate_report(report: Mapping) -> None:
    systems = report.get("systems")
    if not isinstance(systems, dict) or not systems:
        raise ReportError("report has no systems")
    for name, scores in systems.items():
        unknown = set(scores) - set(COLUMNS)
        if unknown:
            raise ReportError(f"{name}: unknown metrics {sorted(unknown)}")
        for k, v in scores.items():
            if not isinstance(v, (int, float)) or not 0 <= v <= 100:
                raise ReportError(f"{name}: {k}={v!r} is outside [0, 100]")


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ReportError(f"{path}: invalid JSON ({exc.msg})") from None
    validate_report(report)
    return report


def best_marks(rows: Mapping[str, Sequence[float]]) -> dict[str, str]:
    """One character per column: '*' where the row ties the column maximum (at 2 decimals)."""
    names = list(rows)
    n_cols = len(next(iter(rows.values())))
    marks = {n: [] for n in names}
    for j in range(n_cols):
        top = max(round(rows[n][j], 2) for n in names)
        for n in names:
            marks[n].append("*" if round(rows[n][j], 2) == top else ".")
    return {n: "".join(m) for n, m in marks.items()}


def render_table(reports: Sequence[Mapping]) -> str:
    """Render blocks of systems; each row is the model name, the scores, then best-marks."""
    for r in reports:
        validate_report(r)
    columns = [c for c in COLUMNS if c in next(iter(reports[0]["systems"].values()))]
    width = max(len(n) for r in reports for n in r["systems"]) + 2
    lines = [" " * width + " ".join(HEADERS[c] for c in columns)]
    for r in reports:
        cols_here = {tuple(c for c in COLUMNS if c in s) for s in r["systems"].values()}
        if cols_here != {tuple(columns)}:
            raise ReportError("all systems must report the same metric columns")
        if r.get("dataset"):
            lines.append(f"== {r['dataset']} ==")
        rows = {n: [s[c] for c in columns] for n, s in r["systems"].items()}
        marks = best_marks(rows)
        for name, vals in rows.items():
            lines.append(f"{name:<{width}}" + " ".join(f"{v:.2f}" for v in vals) + "  " + marks[name])
    return "\n".join(lines) + "\n"


def merge_for_comparison(reports: Sequence[Mapping]) -> dict:
    """Merge single-system reports into one block; requires >= 2 systems and equal columns."""
    systems: dict[str, dict] = {}
    for r in reports:
        validate_report(r)
        for name, scores in r["systems"].items():
            if name in systems:
                raise ReportError(f"system {name!r} appears in more than one report")
            systems[name] = scores
    if len(systems) < 2:
        raise ReportError("comparison needs at least two systems")
    if len({tuple(sorted(s)) for s in systems.values()}) != 1:
        raise ReportError("reports do not share the same metric columns")
    datasets = {r.get("dataset") for r in reports} - {None}
    return {"dataset": datasets.pop() if len(datasets) == 1 else None, "systems": systems}


def hallucination_lines(source: str, summaries: Mapping[str, str], orders=(1, 2, 3)) -> list[str]:
    src = tokenize(source)
    out = []
    for name, text in summaries.items():
        toks = tokenize(text)
        out.append(f"  {name}: {mark_novel(toks, src, 1)}")
        for n in orders:
            grams = sorted(" ".join(g) for g in novel_ngrams(toks, src, n))
            out.append(f"    novel {n}-grams ({len(grams)}): " + "; ".join(grams))
    return out
