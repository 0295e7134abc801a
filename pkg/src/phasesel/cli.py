"""Command-line interface.

Subcommands: chain | select | shift | analyze.  Options may come from a
flat JSON config file (--config); explicit flags override file values.
Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 divergence.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dynamics import DivergenceError
from .harness import ExperimentConfig, UsageError, analyze_run, run_experiment
from .io import ImageIOError
from .scenes import preset_names

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DIVERGED = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--t-end", type=float, dest="t_end")


def _add_scene(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--image", help="input image (PNG or binary PPM)")
    parser.add_argument("--labels", help="grayscale label map (PNG/PGM)")
    parser.add_argument(
        "--preset", help=f"bundled scene preset ({', '.join(preset_names())})"
    )
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--delta-omega", type=float, dest="delta_omega")
    parser.add_argument("--kplus-max", type=float, dest="k_plus_max")
    parser.add_argument("--kminus-max", type=float, dest="k_minus_max")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasesel",
        description="Salient-object selection by chaotic phase synchronization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    chain = sub.add_parser("chain", help="50-oscillator chain transition runs")
    _add_common(chain)
    chain.add_argument("--chain-n", type=int, dest="chain_n")
    chain.add_argument(
        "--k",
        type=float,
        action="append",
        dest="chain_ks",
        help="coupling strength (repeatable; default 0.01 0.03 0.05)",
    )

    select = sub.add_parser("select", help="fixed-attention object selection")
    _add_common(select)
    _add_scene(select)

    shift = sub.add_parser("shift", help="moving-attention run")
    _add_common(shift)
    _add_scene(shift)

    analyze = sub.add_parser("analyze", help="re-classify a finished run")
    analyze.add_argument("--out", required=True, help="run directory to analyze")
    analyze.add_argument("--window", type=float)
    analyze.add_argument("--eps-slope", type=float, dest="eps_slope")
    analyze.add_argument("--s-max", type=float, dest="s_max")
    return parser


_FLAG_KEYS = (
    "out", "image", "labels", "preset", "sigma", "delta_omega", "k_plus_max",
    "k_minus_max", "dt", "t_end", "seed", "chain_n", "chain_ks",
)


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    flat: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                flat = json.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}")
        except json.JSONDecodeError as err:
            raise UsageError(f"config file is not valid JSON: {err}")
        if not isinstance(flat, dict):
            raise UsageError("config file must hold a JSON object")
    flat["mode"] = args.command
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            flat[key] = value
    if "out" not in flat or flat["out"] is None:
        raise UsageError("an output directory is required (--out)")
    return ExperimentConfig.from_flat(flat)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK

    try:
        if args.command == "analyze":
            overrides = {
                key: getattr(args, key)
                for key in ("window", "eps_slope", "s_max")
                if getattr(args, key, None) is not None
            }
            analysis = analyze_run(args.out, overrides)
            synced = [g for g, v in analysis["verdicts"].items() if v["synchronized"]]
            print(f"analyzed {args.out}: synchronized groups: {synced or 'none'}")
            return EXIT_OK
        config = _config_from_args(args)
        manifest = run_experiment(config)
        if config.mode == "chain":
            for key, entry in manifest["runs"].items():
                if entry.get("diverged"):
                    print(f"{key}: diverged at t={entry['diverged_at']:g}")
                else:
                    v = entry["verdict"]
                    print(
                        f"{key}: synchronized={v['synchronized']} "
                        f"final_slope={v['final_slope']:.5f}"
                    )
            if any(e.get("diverged") for e in manifest["runs"].values()):
                return EXIT_DIVERGED
        else:
            if manifest.get("no_salient_object"):
                print("no salient object")
            else:
                print(
                    f"salient mask: {manifest['mask_pixels']} pixels; "
                    f"outputs in {config.out_dir}"
                )
        return EXIT_OK
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ImageIOError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except DivergenceError as err:
        print(f"diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
