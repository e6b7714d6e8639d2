"""Transformation planning and watermark embedding.

The planner is a deterministic constrained optimizer: it greedily selects
applicable sites in descending detection-weight order (netlist-persistent
payload sites first) until the predicted detection confidence reaches the
threshold, then prunes every site whose removal keeps the plan above the
threshold. Predicted confidence is not an approximation: each candidate
plan is applied to the document, printed, and scored by the real detector,
so embed-then-detect agreement is exact by construction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .ast_nodes import Ast, SourceText
from .detector import NullModel, detect
from .errors import InsufficientCapacity, PayloadTooLarge, SiteStale
from .keys import WatermarkKey
from .parser import parse
from .payload import Payload, encode_payload
from .printer import print_ast
from . import transforms
from .transforms import (RuleId, TransformSite, TransformationRecord,
                         applicable_sites)


@dataclass(frozen=True)
class EmbedObjective:
    m: float = 1.0              # weight on transformation count
    n: float = 0.0              # weight on applicability deviation
    tau: float = 0.95           # detection confidence threshold

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must be in (0, 1)")
        if self.m < 0 or self.n < 0:
            raise ValueError("objective weights must be non-negative")


@dataclass
class TransformPlan:
    selected: tuple[TransformSite, ...]
    predicted_confidence: float
    applicable_count: int = 0
    objective_value: float = 0.0

    def rule_ids(self) -> list[str]:
        return [s.rule.name for s in self.selected]


@dataclass
class WatermarkedDocument:
    source: SourceText
    records: list[TransformationRecord]
    plan: TransformPlan


def _order_key(site: TransformSite):
    """Canonical application order: statement rules first, then token rules,
    renames last (renames invalidate the most node paths)."""
    if site.rule == RuleId.T6:
        group = 2
    elif site.rule.granularity == "statement":
        group = 0
    else:
        group = 1
    return (group, site.rule.num, site.module, site.path, site.aux)


def apply_plan(ast: Ast, sites, key: WatermarkKey, payload: Payload
               ) -> tuple[Ast, list[TransformationRecord]]:
    """Apply sites in canonical order. SiteStale/PayloadTooLarge propagate."""
    records = []
    current = ast
    for site in sorted(sites, key=_order_key):
        current, record = transforms.apply(current, site, key, payload)
        records.append(record)
    return current, records


def default_payload(key: WatermarkKey) -> Payload:
    """Placeholder payload used when planning without a caller-supplied one."""
    return encode_payload("m", "d", key)


def plan(ast: Ast, key: WatermarkKey, objective: EmbedObjective | None = None,
         payload: Payload | None = None,
         null: NullModel | None = None) -> TransformPlan:
    """Select a 1-minimal transformation set reaching the threshold."""
    objective = objective or EmbedObjective()
    payload = payload or default_payload(key)
    null = null or NullModel()
    tau = objective.tau

    candidates: list[TransformSite] = []
    for rule in RuleId:
        candidates.extend(applicable_sites(ast, rule, key))
    if not candidates:
        raise InsufficientCapacity(0.0)

    def weight(site: TransformSite) -> tuple:
        # T15 first (netlist persistence), then by detection weight,
        # rename-robust rules before name-dependent ones, then stable order.
        return (
            0 if site.rule == RuleId.T15 else 1,
            -null.rule_weight(site.rule),
            1 if site.rule in transforms.NAME_DEPENDENT else 0,
            site.rule.num,
            site.module,
            site.path,
            site.aux,
        )

    ordered = sorted(candidates, key=weight)

    def confidence_of(sites) -> float | None:
        """Detector confidence of the fully applied, reprinted plan."""
        try:
            applied, _ = apply_plan(ast, sites, key, payload)
        except (SiteStale, PayloadTooLarge):
            return None
        return detect(print_ast(applied), key, null, tau).confidence

    selected: list[TransformSite] = []
    conf = confidence_of(selected)
    for site in ordered:
        if conf is not None and conf >= tau:
            break
        trial = confidence_of(selected + [site])
        if trial is None:
            continue                      # conflicts with the current set
        if conf is None or trial > conf:
            selected.append(site)
            conf = trial
    if conf is None or conf < tau:
        raise InsufficientCapacity(conf if conf is not None else 0.0,
                                   applicable=len(candidates))

    # prune to 1-minimality: drop any site whose removal keeps conf >= tau
    changed = True
    while changed:
        changed = False
        for site in list(selected):
            rest = [s for s in selected if s is not site]
            trial = confidence_of(rest)
            if trial is not None and trial >= tau:
                selected = rest
                conf = trial
                changed = True
                break

    objective_value = (1.0 - conf) + objective.m * len(selected)
    return TransformPlan(tuple(selected), conf,
                         applicable_count=len(candidates),
                         objective_value=objective_value)


def embed(ast: Ast, the_plan: TransformPlan, key: WatermarkKey,
          payload: Payload) -> WatermarkedDocument:
    """Apply a plan computed from this Ast and render the watermarked source."""
    applied, records = apply_plan(ast, the_plan.selected, key, payload)
    out = print_ast(applied)
    parse(out)                            # output must always reparse
    return WatermarkedDocument(out, records, the_plan)


# ---- manifest sidecar ----

def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def build_manifest(doc: WatermarkedDocument, key: WatermarkKey,
                   payload: Payload, input_text: str) -> dict:
    return {
        "format": "rtlmark-manifest-v1",
        "key_id": key.key_id,
        "input_sha256": _sha256(input_text.encode()),
        "output_sha256": _sha256(doc.source.content.encode()),
        "payload_sha256": _sha256(payload.encoded),
        "predicted_confidence": doc.plan.predicted_confidence,
        "applicable_count": doc.plan.applicable_count,
        "sites": [
            {
                "rule": s.rule.name,
                "module": s.module,
                "path": [list(step) for step in s.path],
                "aux": list(s.aux),
            }
            for s in doc.plan.selected
        ],
    }


def sites_from_manifest(manifest: dict) -> list[TransformSite]:
    sites = []
    for entry in manifest["sites"]:
        sites.append(TransformSite(
            rule=RuleId[entry["rule"]],
            module=entry["module"],
            path=tuple(tuple(step) for step in entry["path"]),
            aux=tuple(entry["aux"]),
        ))
    return sites


def manifest_to_json(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True)
