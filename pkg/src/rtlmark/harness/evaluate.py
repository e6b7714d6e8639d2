"""Corpus-level evaluation: effectiveness, robustness, transparency.

Corpus layout: a directory with `eligible/` (watermark targets) and `clean/`
(human-written negatives) subdirectories of .v files, plus an optional
manifest.json naming top modules ({"tops": {"file.v": "module"}}).

The run calibrates the null model on the clean set, embeds every eligible
file, re-checks every recorded transformation against the bounded-simulation
oracle (a single equivalence failure aborts the run), detects over both
sets (optionally after a rename attack, optionally through synthesis and
netlist tracing), and aggregates ACC/TPR/FPR plus transparency statistics.
Reports contain no timestamps or runtimes, so identical configurations
produce byte-identical report files.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field

from ..ast_nodes import Ast, SourceText
from ..detector import NullModel, calibrate, detect
from ..embedder import EmbedObjective, plan, embed
from ..errors import (InsufficientCapacity, ParseError, RtlmarkError,
                      ToolFailed, ToolMissing, ToolTimeout)
from ..keys import WatermarkKey
from ..lexer import lex
from ..parser import parse
from ..payload import Payload, encode_payload
from ..printer import print_ast
from ..transforms import RuleId
from ..netlist import SynthConfig, parse_netlist, synthesize, tool_available, \
    trace_any_width
from .attack import AttackSpec, rename_attack
from .equiv import EquivBudget, check_equivalence


@dataclass
class EvalConfig:
    tau: float = 0.95
    objective_m: float = 1.0
    objective_n: float = 0.0
    attack_fraction: float | None = None
    attack_seed: int = 0
    netlist: bool = False
    synth: SynthConfig = field(default_factory=SynthConfig.from_environment)
    budget: EquivBudget = field(default_factory=EquivBudget)
    workers: int = 1
    model_sig: str = "m1"
    dev_sig: str = "d1"


@dataclass
class MetricsReport:
    acc: float
    tpr: float
    fpr: float
    counts: dict[str, int]
    per_file: list[dict]
    transparency: dict
    netlist: dict
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "acc": self.acc, "tpr": self.tpr, "fpr": self.fpr,
            "counts": self.counts, "per_file": self.per_file,
            "transparency": self.transparency, "netlist": self.netlist,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        lines = [
            "metric        value",
            f"ACC(%)        {self.acc:.2f}",
            f"TPR(%)        {self.tpr:.2f}",
            f"FPR(%)        {self.fpr:.2f}",
            f"counts        TP={self.counts['tp']} FN={self.counts['fn']} "
            f"TN={self.counts['tn']} FP={self.counts['fp']}",
            f"transparency  applicable(mean)={self.transparency['mean_applicable']:.2f} "
            f"selected(mean)={self.transparency['mean_selected']:.2f} "
            f"discrepancy(mean)={self.transparency['mean_discrepancy']:.4f}",
        ]
        if self.netlist.get("attempted", 0):
            lines.append(
                f"netlist       TPR(%)={self.netlist['tpr']:.2f} "
                f"FPR(%)={self.netlist['fpr']:.2f} "
                f"(attempted={self.netlist['attempted']})")
        lines.append("")
        lines.append("file                            class     verdict      conf    sel/app")
        for row in self.per_file:
            sel = row.get("selected", "-")
            app = row.get("applicable", "-")
            lines.append(
                f"{row['file']:<32}{row['class']:<10}{row['verdict']:<13}"
                f"{row.get('confidence', 0.0):<8.4f}{sel}/{app}")
        return "\n".join(lines) + "\n"


def token_edit_distance(a: str, b: str) -> float:
    """Normalized Levenshtein distance over lexer tokens (comments ignored)."""
    try:
        ta = [t.text for t in lex(a)[0]]
        tb = [t.text for t in lex(b)[0]]
    except ParseError:
        return 1.0
    if not ta and not tb:
        return 0.0
    prev = list(range(len(tb) + 1))
    for i, x in enumerate(ta, 1):
        cur = [i] + [0] * len(tb)
        for j, y in enumerate(tb, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (x != y))
        prev = cur
    return prev[-1] / max(len(ta), len(tb))


def load_corpus_dir(corpus_dir: str) -> tuple[list[str], list[str], dict]:
    eligible_dir = os.path.join(corpus_dir, "eligible")
    clean_dir = os.path.join(corpus_dir, "clean")
    eligible = sorted(
        os.path.join(eligible_dir, f) for f in os.listdir(eligible_dir)
        if f.endswith(".v")) if os.path.isdir(eligible_dir) else []
    clean = sorted(
        os.path.join(clean_dir, f) for f in os.listdir(clean_dir)
        if f.endswith(".v")) if os.path.isdir(clean_dir) else []
    tops = {}
    manifest_path = os.path.join(corpus_dir, "manifest.json")
    if os.path.exists(manifest_path):
        with open(manifest_path) as f:
            tops = json.load(f).get("tops", {})
    return eligible, clean, tops


def _read(path: str) -> SourceText:
    with open(path) as f:
        return SourceText(f.read(), origin=path)


def _check_records_equivalent(original: Ast, records, budget: EquivBudget,
                              failures: list[str], label: str) -> None:
    for rec in records:
        before = parse(SourceText(rec.before_span, f"{label}:before"))
        after = parse(SourceText(rec.after_span, f"{label}:after"))
        verdict = check_equivalence(before, after, budget)
        if not verdict.equivalent:
            failures.append(
                f"{label}: {rec.site.rule.name} at {rec.site.module} "
                f"is not equivalence-preserving: {verdict}")


def _eval_eligible(path: str, key: WatermarkKey, cfg: EvalConfig,
                   null: NullModel, payload: Payload) -> dict:
    name = os.path.basename(path)
    row: dict = {"file": name, "class": "eligible"}
    source = _read(path)
    try:
        ast = parse(source)
    except ParseError as exc:
        return {**row, "verdict": "error", "error": str(exc)}

    objective = EmbedObjective(cfg.objective_m, cfg.objective_n, cfg.tau)
    try:
        the_plan = plan(ast, key, objective, payload, null)
    except InsufficientCapacity as exc:
        return {**row, "verdict": "infeasible", "confidence": exc.achieved,
                "applicable": exc.applicable, "selected": 0,
                "infeasible": True}
    doc = embed(ast, the_plan, key, payload)

    equiv_failures: list[str] = []
    _check_records_equivalent(ast, doc.records, cfg.budget, equiv_failures,
                              name)
    whole = check_equivalence(ast, parse(doc.source), cfg.budget)
    if not whole.equivalent:
        equiv_failures.append(f"{name}: composed document inequivalent: {whole}")

    detect_input = doc.source
    if cfg.attack_fraction is not None:
        detect_input = rename_attack(
            doc.source, AttackSpec(cfg.attack_fraction, seed=cfg.attack_seed))
    report = detect(detect_input, key, null, cfg.tau)
    row.update({
        "verdict": report.verdict,
        "confidence": report.confidence,
        "applicable": the_plan.applicable_count,
        "selected": len(the_plan.selected),
        "rules": the_plan.rule_ids(),
        "discrepancy": token_edit_distance(source.content, doc.source.content),
        "equiv_failures": equiv_failures,
        "watermarked_text": doc.source.content,
        "attacked_text": detect_input.content
        if cfg.attack_fraction is not None else None,
        "has_t15": any(s.rule == RuleId.T15 for s in the_plan.selected),
    })
    return row


def _eval_clean(path: str, key: WatermarkKey, cfg: EvalConfig,
                null: NullModel) -> dict:
    name = os.path.basename(path)
    row: dict = {"file": name, "class": "clean"}
    source = _read(path)
    try:
        detect_input = source
        if cfg.attack_fraction is not None:
            detect_input = rename_attack(
                source, AttackSpec(cfg.attack_fraction, seed=cfg.attack_seed))
    except ParseError as exc:
        return {**row, "verdict": "error", "error": str(exc)}
    report = detect(detect_input, key, null, cfg.tau)
    row.update({"verdict": report.verdict, "confidence": report.confidence,
                "clean_text": detect_input.content})
    return row


def _netlist_leg(rows: list[dict], key: WatermarkKey, cfg: EvalConfig,
                 diagnostics: list[str]) -> dict:
    stats = {"attempted": 0, "recovered": 0, "missed": 0,
             "clean_traces": 0, "clean_synth": 0, "tpr": 0.0, "fpr": 0.0}
    if not tool_available(cfg.synth):
        diagnostics.append(
            "netlist evaluation skipped: synthesis tool not available")
        return stats
    for row in rows:
        try:
            if row["class"] == "eligible" and row.get("has_t15"):
                text = row.get("attacked_text") or row["watermarked_text"]
                netlist = synthesize(SourceText(text, row["file"]), cfg.synth)
                ev = trace_any_width(parse_netlist(netlist), key)
                stats["attempted"] += 1
                if ev.found:
                    stats["recovered"] += 1
                    row["netlist"] = "recovered"
                else:
                    stats["missed"] += 1
                    row["netlist"] = "missed"
            elif row["class"] == "clean" and "clean_text" in row:
                netlist = synthesize(SourceText(row["clean_text"],
                                                row["file"]), cfg.synth)
                ev = trace_any_width(parse_netlist(netlist), key)
                stats["clean_synth"] += 1
                if ev.found:
                    stats["clean_traces"] += 1
                    row["netlist"] = "false-trace"
        except (ToolMissing, ToolFailed, ToolTimeout, ParseError,
                RtlmarkError) as exc:
            diagnostics.append(f"netlist: {row['file']}: {exc}")
    if stats["attempted"]:
        stats["tpr"] = 100.0 * stats["recovered"] / stats["attempted"]
    if stats["clean_synth"]:
        stats["fpr"] = 100.0 * stats["clean_traces"] / stats["clean_synth"]
    return stats


def evaluate(corpus_dir: str, key: WatermarkKey,
             cfg: EvalConfig | None = None) -> MetricsReport:
    cfg = cfg or EvalConfig()
    eligible, clean, _tops = load_corpus_dir(corpus_dir)
    diagnostics: list[str] = []

    clean_sources = [_read(p) for p in clean]
    null = calibrate(clean_sources, key) if clean_sources else NullModel()
    payload = encode_payload(cfg.model_sig, cfg.dev_sig, key)

    rows: list[dict] = []
    if cfg.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            elig = [pool.submit(_eval_eligible, p, key, cfg, null, payload)
                    for p in eligible]
            cln = [pool.submit(_eval_clean, p, key, cfg, null)
                   for p in clean]
            rows.extend(f.result() for f in elig)
            rows.extend(f.result() for f in cln)
    else:
        for path in eligible:
            rows.append(_eval_eligible(path, key, cfg, null, payload))
        for path in clean:
            rows.append(_eval_clean(path, key, cfg, null))

    equiv_failures = [f for row in rows
                      for f in row.get("equiv_failures", [])]
    if equiv_failures:
        for f in equiv_failures:
            print(f"EQUIVALENCE FAILURE: {f}", file=sys.stderr)
        raise RtlmarkError(
            f"{len(equiv_failures)} transformation(s) failed the "
            "equivalence oracle")

    netlist_stats = _netlist_leg(rows, key, cfg, diagnostics) if cfg.netlist \
        else {"attempted": 0, "tpr": 0.0, "fpr": 0.0}

    tp = sum(1 for r in rows if r["class"] == "eligible"
             and r["verdict"] == "watermarked")
    fn = sum(1 for r in rows if r["class"] == "eligible"
             and r["verdict"] == "clean")
    tn = sum(1 for r in rows if r["class"] == "clean"
             and r["verdict"] == "clean")
    fp = sum(1 for r in rows if r["class"] == "clean"
             and r["verdict"] == "watermarked")
    infeasible = sum(1 for r in rows if r["verdict"] == "infeasible")
    errors = sum(1 for r in rows if r["verdict"] == "error")
    total = tp + fn + tn + fp
    acc = 100.0 * (tp + tn) / total if total else 0.0
    tpr = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    fpr = 100.0 * fp / (fp + tn) if fp + tn else 0.0

    embedded = [r for r in rows if "applicable" in r
                and r["verdict"] not in ("infeasible", "error")]
    transparency = {
        "mean_applicable": (sum(r["applicable"] for r in embedded)
                            / len(embedded)) if embedded else 0.0,
        "mean_selected": (sum(r["selected"] for r in embedded)
                          / len(embedded)) if embedded else 0.0,
        "mean_discrepancy": (sum(r.get("discrepancy", 0.0) for r in embedded)
                             / len(embedded)) if embedded else 0.0,
        "per_file": [
            {"file": r["file"], "applicable": r["applicable"],
             "selected": r["selected"]} for r in embedded],
    }

    # drop bulky working fields from the persisted rows
    for r in rows:
        for k in ("watermarked_text", "attacked_text", "clean_text",
                  "equiv_failures"):
            r.pop(k, None)

    return MetricsReport(
        acc=acc, tpr=tpr, fpr=fpr,
        counts={"tp": tp, "fn": fn, "tn": tn, "fp": fp,
                "infeasible": infeasible, "errors": errors},
        per_file=rows, transparency=transparency, netlist=netlist_stats,
        diagnostics=diagnostics)
