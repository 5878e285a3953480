"""Command-line front end: ``lfgglue --fstruct F --lexicon L``."""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .fstruct import FStructureError, parse_fstructure
from .glue import SortError, format_glue
from .lexicon import LexiconError, instantiate_entries, parse_lexicon
from .meaning import format_term
from .prover import NoReadingError, SearchLimits, StepLimitExceeded, derive_readings
from .syntax import ParseError

EXIT_OK, EXIT_INPUT, EXIT_NO_READING = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    fstructure_path: Path
    lexicon_path: Path
    limits: SearchLimits = SearchLimits()
    output_mode: str = "pretty"
    trace: bool = False
    all_readings: bool = True


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lfgglue", description="Derive ranked glue-semantics readings.")
    ap.add_argument("--fstruct", required=True, type=Path, help="f-structure file")
    ap.add_argument("--lexicon", required=True, type=Path, help="lexicon file")
    ap.add_argument("--max-qnp", type=int, default=2, help="maximum QNP duplications (default 2)")
    ap.add_argument("--max-steps", type=_positive, default=100_000, help="search step budget")
    ap.add_argument("--max-depth", type=_positive, default=2, help="maximum hypothetical nesting")
    ap.add_argument("--max-bang-uses", type=int, default=None,
                    help="copies allowed per banged premise (default: number of R-relations)")
    ap.add_argument("--trace", action="store_true", help="print derivation traces")
    ap.add_argument("--format", choices=("pretty", "structured"), default="pretty")
    ap.add_argument("--first", action="store_true", help="print only the top reading")
    return ap


def _step_dict(s) -> dict:
    return {"step": s.index, "rule": s.rule, "inputs": list(s.inputs), "output": format_glue(s.output)}


def _label_line(text: str, label: str | None) -> int | None:
    if label is None:
        return None
    hit = re.search(rf"(?<![\w-]){re.escape(label)}\s*:", text)
    return text.count("\n", 0, hit.start()) + 1 if hit else None


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        fs_text = cfg.fstructure_path.read_text(encoding="utf-8")
        lex_text = cfg.lexicon_path.read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e.filename}: {e.strerror}", file=err)
        return EXIT_INPUT
    try:
        fs = parse_fstructure(fs_text, str(cfg.fstructure_path))
        lex = parse_lexicon(lex_text, str(cfg.lexicon_path))
    except (ParseError, FStructureError, SortError) as e:
        print(f"error: {e}", file=err)
        return EXIT_INPUT
    try:
        premises = instantiate_entries(fs, lex)
    except LexiconError as e:
        where = str(cfg.fstructure_path)
        line = _label_line(fs_text, e.label)
        if line:
            where += f": line {line}"
        print(f"error: {where}: {e} (lexicon {cfg.lexicon_path})", file=err)
        return EXIT_INPUT
    try:
        readings = derive_readings(premises, fs.root, cfg.limits)
    except NoReadingError as e:
        print(f"no reading: {e}", file=err)
        for line in e.unconsumed:
            print(f"  unconsumed {line}", file=err)
        return EXIT_NO_READING
    except StepLimitExceeded as e:
        print(f"no reading: {e}", file=err)
        return EXIT_NO_READING
    if not cfg.all_readings:
        readings = readings[:1]
    best = min(r.qnp_dups for r in readings)
    if cfg.output_mode == "structured":
        doc = {"root": fs.root, "readings": []}
        for rank, r in enumerate(readings, 1):
            item = {
                "rank": rank,
                "meaning": format_term(r.meaning),
                "qnp_dups": r.qnp_dups,
                "dispreferred": r.qnp_dups > best,
                "bang_uses": dict(r.bang_uses),
                "fact_uses": dict(r.fact_uses),
            }
            if cfg.trace:
                item["trace"] = [_step_dict(s) for s in r.trace]
            doc["readings"].append(item)
        print(json.dumps(doc, indent=2, ensure_ascii=False), file=out)
    else:
        for rank, r in enumerate(readings, 1):
            print(f"#{rank} [qnp={r.qnp_dups}] {format_term(r.meaning)}", file=out)
            if cfg.trace:
                for s in r.trace:
                    print(f"    {s}", file=out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        limits = SearchLimits(max_qnp_dups=args.max_qnp, max_steps=args.max_steps,
                              max_hypothesis_depth=args.max_depth,
                              max_bang_uses_per_formula=args.max_bang_uses)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    cfg = RunConfig(args.fstruct, args.lexicon, limits, args.format, args.trace, not args.first)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
