"""Command-line interface.

    glowrl run --preset fig5a [--seed N] [--agents N] [--budget N]
               [--out DIR] [--workers N]
    glowrl run --config FILE [--out DIR] ...
    glowrl list-presets
    glowrl policy-dump --preset fig10 --out FILE [--seed N] [--budget N]
    glowrl verify [--out FILE] [--seed N]

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace


def _apply_overrides(cfg, args):
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "agents", None) is not None:
        updates["agents"] = args.agents
    if args.budget is not None:
        updates["budget"] = args.budget
    if getattr(args, "workers", None) is not None:
        updates["workers"] = args.workers
    if args.out is not None:
        updates["out_dir"] = args.out
    return replace(cfg, **updates) if updates else cfg


def _cmd_run(args) -> int:
    from .configio import read_config
    from .presets import get_preset
    from .runner import run_and_emit, run_tail_sweep

    if (args.preset is None) == (args.config is None):
        print("run: need exactly one of --preset or --config", file=sys.stderr)
        return 1
    if args.config is not None:
        cfg = _apply_overrides(read_config(args.config), args)
        files = run_and_emit(cfg)
        for f in files:
            print(f)
        return 0
    preset = get_preset(args.preset)
    if preset.tail_sweep:
        base = _apply_overrides(preset.base, args)
        files = run_tail_sweep(preset, base)
    else:
        files = []
        for cfg in preset.curve_configs():
            cfg = _apply_overrides(cfg, args)
            files += run_and_emit(cfg)
    for f in files:
        print(f)
    return 0


def _cmd_list_presets(_args) -> int:
    from .presets import PRESETS

    for name, preset in sorted(PRESETS.items()):
        base = preset.base
        extra = f"{len(preset.curves)} curve(s), {base.kind}, budget {base.budget}"
        print(f"{name:8s} {extra}")
    return 0


def _cmd_policy_dump(args) -> int:
    from .presets import get_preset
    from .runner import grid_policy_from_config

    preset = get_preset(args.preset)
    cfg = _apply_overrides(preset.base, args)
    if cfg.kind != "grid":
        print(f"policy-dump: preset {args.preset!r} is not a grid preset", file=sys.stderr)
        return 1
    gw, table = grid_policy_from_config(cfg)
    out = args.out or "policy.csv"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("cell_row,cell_col,p_right,p_down,p_left,p_up\n")
        for cell, row in zip(gw.free_cells, table):
            fh.write(",".join([str(cell[0]), str(cell[1])] + [repr(float(p)) for p in row]))
            fh.write("\n")
    print(out)
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_verification

    ok = run_verification(seed=args.seed if args.seed is not None else 0,
                          out_path=args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glowrl", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a preset or config file")
    p_run.add_argument("--preset")
    p_run.add_argument("--config")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--agents", type=int)
    p_run.add_argument("--budget", type=int)
    p_run.add_argument("--workers", type=int)
    p_run.add_argument("--out")
    p_run.set_defaults(fn=_cmd_run)

    p_list = sub.add_parser("list-presets", help="print the preset catalog")
    p_list.set_defaults(fn=_cmd_list_presets)

    p_dump = sub.add_parser("policy-dump", help="train a grid preset and dump its policy table")
    p_dump.add_argument("--preset", required=True)
    p_dump.add_argument("--out")
    p_dump.add_argument("--seed", type=int)
    p_dump.add_argument("--budget", type=int)
    p_dump.set_defaults(fn=_cmd_policy_dump)

    p_verify = sub.add_parser("verify", help="run the invariant and navigation checks")
    p_verify.add_argument("--out")
    p_verify.add_argument("--seed", type=int)
    p_verify.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
