"""Command-line entry point.

Subcommands: keygen, embed, detect, netlist-detect, attack, evaluate,
calibrate, rules. Exit codes: detect uses 0 (watermarked) / 1 (clean) /
2 (error); elsewhere 0 success, 1 domain failure (unparsable input,
insufficient capacity), 64 usage, 70 internal error, 74 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .ast_nodes import SourceText
from .config import Config, load_config
from .detector import NullModel, calibrate, detect
from .embedder import (EmbedObjective, build_manifest, embed,
                       manifest_to_json, plan)
from .errors import (BadFraming, InsufficientCapacity, ParseError,
                     RtlmarkError, ToolFailed, ToolMissing, ToolTimeout)
from .harness.attack import AttackSpec, rename_attack
from .harness.evaluate import EvalConfig, evaluate
from .keys import generate_key, load_key, save_key
from .netlist import parse_netlist, synthesize, trace_any_width
from .payload import decode_payload, encode_payload
from .transforms import catalog

EXIT_USAGE = 64
EXIT_INTERNAL = 70
EXIT_IO = 74


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_source(path: str) -> SourceText:
    with open(path) as f:
        return SourceText(f.read(), origin=path)


def _parse_payload_arg(text: str, cfg: Config) -> tuple[str, str]:
    model, dev = cfg.model_sig, cfg.dev_sig
    for part in text.split(","):
        if "=" not in part:
            raise ValueError(f"bad payload field '{part}', expected k=v")
        k, v = part.split("=", 1)
        if k.strip() == "model":
            model = v.strip()
        elif k.strip() == "dev":
            dev = v.strip()
        else:
            raise ValueError(f"unknown payload field '{k}'")
    return model, dev


def build_parser() -> _Parser:
    p = _Parser(prog="rtlmark",
                description="Keyed semantics-preserving watermarks for "
                            "Verilog RTL")
    p.add_argument("--config", help="JSON config file")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("keygen", help="generate a new watermark key file")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--key-id", default=None)

    sp = sub.add_parser("embed", help="watermark a Verilog file")
    sp.add_argument("input")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--key", required=True)
    sp.add_argument("--payload", default=None,
                    help="model=...,dev=... signature fields")
    sp.add_argument("--tau", type=float, default=None)

    sp = sub.add_parser("detect", help="test a file for the keyed watermark")
    sp.add_argument("input")
    sp.add_argument("--key", required=True)
    sp.add_argument("--null", default=None, help="calibrated null model file")
    sp.add_argument("--tau", type=float, default=None)

    sp = sub.add_parser("netlist-detect",
                        help="synthesize and trace the gate-level payload")
    sp.add_argument("input")
    sp.add_argument("--key", required=True)
    sp.add_argument("--top", default=None)
    sp.add_argument("--netlist", action="store_true",
                    help="input is already a structural netlist")
    sp.add_argument("--log", default=None, help="write synthesis log here")

    sp = sub.add_parser("attack", help="rename-attack a file")
    sp.add_argument("input")
    sp.add_argument("-o", "--out", required=True)
    sp.add_argument("--fraction", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("evaluate", help="run the corpus evaluation")
    sp.add_argument("corpus")
    sp.add_argument("--key", required=True)
    sp.add_argument("--attack", type=float, default=None)
    sp.add_argument("--attack-seed", type=int, default=0)
    sp.add_argument("--netlist", action="store_true")
    sp.add_argument("--out-dir", default=".")

    sp = sub.add_parser("calibrate", help="fit the null model on clean code")
    sp.add_argument("corpus", help="directory of clean .v files")
    sp.add_argument("--key", required=True)
    sp.add_argument("-o", "--out", required=True)

    sub.add_parser("rules", help="dump the transformation catalog")
    return p


def _cmd_keygen(args, cfg: Config) -> int:
    key = generate_key(args.key_id or os.path.basename(args.out))
    save_key(key, args.out)
    print(f"wrote key '{key.key_id}' to {args.out}")
    return 0


def _cmd_embed(args, cfg: Config) -> int:
    key = load_key(args.key)
    source = _read_source(args.input)
    model, dev = _parse_payload_arg(args.payload, cfg) if args.payload \
        else (cfg.model_sig, cfg.dev_sig)
    payload = encode_payload(model, dev, key, cfg.payload_max_bytes)
    tau = args.tau if args.tau is not None else cfg.tau
    from .parser import parse
    ast = parse(source)
    objective = EmbedObjective(cfg.m, cfg.n, tau)
    the_plan = plan(ast, key, objective, payload)
    doc = embed(ast, the_plan, key, payload)
    with open(args.out, "w") as f:
        f.write(doc.source.content)
    manifest = build_manifest(doc, key, payload, source.content)
    with open(args.out + ".manifest.json", "w") as f:
        f.write(manifest_to_json(manifest))
    print(f"embedded {len(the_plan.selected)} transformation(s) "
          f"({', '.join(the_plan.rule_ids())}), "
          f"confidence {the_plan.predicted_confidence:.4f}")
    print(f"wrote {args.out} and {args.out}.manifest.json")
    return 0


def _cmd_detect(args, cfg: Config) -> int:
    key = load_key(args.key)
    null = None
    if args.null:
        with open(args.null) as f:
            null = NullModel.from_json(f.read())
    tau = args.tau if args.tau is not None else cfg.tau
    report = detect(_read_source(args.input), key, null, tau)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    if report.diagnostics:
        return 2
    return 0 if report.verdict == "watermarked" else 1


def _cmd_netlist_detect(args, cfg: Config) -> int:
    key = load_key(args.key)
    source = _read_source(args.input)
    if args.netlist:
        netlist = source
    else:
        netlist = synthesize(source, cfg.synth(), top=args.top,
                             log_path=args.log)
    graph = parse_netlist(netlist)
    evidence = trace_any_width(graph, key)
    out = {
        "found": evidence.found,
        "payload_hex": evidence.payload_bytes.hex(),
        "trigger_net": evidence.trigger_net,
        "carrier_net": evidence.carrier_net,
        "diagnostics": evidence.diagnostics,
    }
    if evidence.found:
        try:
            model, dev = decode_payload(evidence.payload_bytes, key)
            out["model_signature"] = model
            out["developer_signature"] = dev
        except BadFraming as exc:
            out["decode_error"] = str(exc)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if evidence.found else 1


def _cmd_attack(args, cfg: Config) -> int:
    spec = AttackSpec(fraction=args.fraction, seed=args.seed)
    attacked = rename_attack(_read_source(args.input), spec)
    with open(args.out, "w") as f:
        f.write(attacked.content)
    print(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args, cfg: Config) -> int:
    key = load_key(args.key)
    eval_cfg = EvalConfig(
        tau=cfg.tau, objective_m=cfg.m, objective_n=cfg.n,
        attack_fraction=args.attack, attack_seed=args.attack_seed,
        netlist=args.netlist, synth=cfg.synth(), budget=cfg.budget(),
        workers=cfg.workers, model_sig=cfg.model_sig, dev_sig=cfg.dev_sig)
    report = evaluate(args.corpus, key, eval_cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "report.json")
    text_path = os.path.join(args.out_dir, "report.txt")
    with open(json_path, "w") as f:
        f.write(report.to_json())
    with open(text_path, "w") as f:
        f.write(report.to_table())
    print(report.to_table())
    print(f"wrote {json_path} and {text_path}")
    return 0


def _cmd_calibrate(args, cfg: Config) -> int:
    key = load_key(args.key)
    paths = sorted(os.path.join(args.corpus, f)
                   for f in os.listdir(args.corpus) if f.endswith(".v"))
    corpus = [_read_source(p) for p in paths]
    null = calibrate(corpus, key)
    with open(args.out, "w") as f:
        f.write(null.to_json())
    print(f"calibrated on {null.corpus_size} files, wrote {args.out}")
    return 0


def _cmd_rules(args, cfg: Config) -> int:
    print(json.dumps(catalog(), indent=2))
    return 0


_COMMANDS = {
    "keygen": _cmd_keygen,
    "embed": _cmd_embed,
    "detect": _cmd_detect,
    "netlist-detect": _cmd_netlist_detect,
    "attack": _cmd_attack,
    "evaluate": _cmd_evaluate,
    "calibrate": _cmd_calibrate,
    "rules": _cmd_rules,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"rtlmark: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, cfg)
    except OSError as exc:
        print(f"rtlmark: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParseError, InsufficientCapacity, ToolMissing, ToolFailed,
            ToolTimeout, ValueError) as exc:
        print(f"rtlmark: {exc}", file=sys.stderr)
        return 2 if args.command == "detect" else 1
    except RtlmarkError as exc:
        print(f"rtlmark: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
