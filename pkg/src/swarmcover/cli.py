"""Command line front end.

Three subcommands, all thin wrappers over the library:

* ``run <config>``    -- run every (map, uavs, mode) combination listed in
  an INI configuration file, write one results CSV (plus an optional
  trace sidecar), and print a mean ± std summary grid.
* ``render <csv> --map <id> --seed <n>`` -- replay a logged best episode
  from the sidecar next to the CSV and print the covered map.
* ``maps``            -- list the bundled maps.

Exit codes: 0 success, 1 configuration error (bad flags, bad config
file, missing or invalid map), 2 runtime error (no matching trace,
output files unwritable).
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import re
import sys

from . import experiment
from .agent import (
    DEFAULT_EPSILON,
    DEFAULT_EPSILON_DECAY,
    DEFAULT_EPSILON_MIN,
    DEFAULT_GAMMA,
    DEFAULT_MEMORY_SIZE,
    DEFAULT_BATCH_SIZE,
    LOCAL,
    MODES,
)
from .densenet import DEFAULT_LEARNING_RATE
from .experiment import (
    DEFAULT_MAX_EPISODES,
    DEFAULT_SEEDS,
    AllRunsFailedError,
    ConfigError,
    ExperimentSpec,
    RunResult,
    aggregate,
    results_rows,
    run_sweep,
    trace_entries,
    write_results_csv,
    write_traces,
)
from .gridworld import (
    BUNDLED_MAP_NOTES,
    MapError,
    initial_swarm_state,
    load_bundled_map,
    parse_map,
    resolve_map,
    transition,
)

OUTPUT_DIR_ENV = "SWARMCOVER_OUTPUT_DIR"
TRACE_SUFFIX = ".traces.json"

UNVISITED_CHAR = "·"  # ·
VISITED_CHAR = "▪"  # ▪

_DEFAULTS_TEXT = f"""\
defaults (used wherever the config file is silent):
  epsilon {DEFAULT_EPSILON}, epsilon_decay {DEFAULT_EPSILON_DECAY}, epsilon_min {DEFAULT_EPSILON_MIN},
  gamma {DEFAULT_GAMMA}, memory_size {DEFAULT_MEMORY_SIZE} experiences, batch_size {DEFAULT_BATCH_SIZE},
  learning_rate {DEFAULT_LEARNING_RATE}, episodes {DEFAULT_MAX_EPISODES} per run,
  seeds {", ".join(str(s) for s in DEFAULT_SEEDS)}, step budget 100 x free cells

exit codes: 0 success, 1 configuration error, 2 runtime error
"""

_RUN_EPILOG = f"""\
configuration file (INI format):
  [run]
    maps         comma-separated bundled map ids or map file paths (required)
    uavs         swarm sizes to sweep, e.g. "1, 2, 3" (default: 1)
    modes        any of {", ".join(MODES)} (default: {LOCAL})
    seeds        integer seeds (default: {", ".join(str(s) for s in DEFAULT_SEEDS)})
    episodes     episodes per run (default: {DEFAULT_MAX_EPISODES})
    step_budget  per-episode cap on total swarm actions
                 (default: 100 x free cells of the map)
    output       results CSV path (default: results.csv)
    log_traces   also write best-episode traces for `render` (default: false)
    parallelism  worker processes for independent runs (default: 1)
  [training]
    epsilon {DEFAULT_EPSILON}, epsilon_decay {DEFAULT_EPSILON_DECAY}, epsilon_min {DEFAULT_EPSILON_MIN}, gamma {DEFAULT_GAMMA},
    memory_size {DEFAULT_MEMORY_SIZE}, learning_rate {DEFAULT_LEARNING_RATE}, batch_size {DEFAULT_BATCH_SIZE},
    allow_shared_cells false

unknown keys are rejected. command line flags override file values.

environment:
  {OUTPUT_DIR_ENV}  directory prepended to relative output paths
"""

_KNOWN_KEYS = {
    "run": {
        "maps",
        "uavs",
        "modes",
        "seeds",
        "episodes",
        "step_budget",
        "output",
        "log_traces",
        "parallelism",
    },
    "training": {
        "epsilon",
        "epsilon_decay",
        "epsilon_min",
        "gamma",
        "memory_size",
        "learning_rate",
        "batch_size",
        "allow_shared_cells",
    },
}


class RuntimeFailure(RuntimeError):
    """Errors past configuration: missing traces, unwritable output."""


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as configuration errors
    instead of exiting the process on its own."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="swarmcover",
        description="Multi-UAV full-coverage training runs on grid maps.",
        epilog=_DEFAULTS_TEXT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run",
        help="run all experiments from a config file and write a results CSV",
        epilog=_RUN_EPILOG + "\n" + _DEFAULTS_TEXT,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run_p.add_argument("config", help="INI configuration file")
    run_p.add_argument("--output", help="results CSV path (overrides the file)")
    run_p.add_argument("--seeds", help="comma-separated seeds (overrides the file)")
    run_p.add_argument("--episodes", type=int, help="episodes per run")
    run_p.add_argument("--parallelism", type=int, help="worker processes")
    run_p.add_argument(
        "--log-traces",
        action="store_true",
        default=None,
        help="record best-episode traces for `render`",
    )
    run_p.set_defaults(func=cmd_run)

    render_p = sub.add_parser(
        "render", help="print the covered map of a logged best episode"
    )
    render_p.add_argument("csv", help="results CSV written by `run` with log_traces")
    render_p.add_argument("--map", required=True, help="map id to select")
    render_p.add_argument("--seed", required=True, type=int, help="seed to select")
    render_p.add_argument("--uavs", type=int, help="narrow the selection by swarm size")
    render_p.add_argument("--mode", choices=MODES, help="narrow the selection by mode")
    render_p.set_defaults(func=cmd_render)

    maps_p = sub.add_parser("maps", help="list the bundled maps")
    maps_p.set_defaults(func=cmd_maps)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except (ConfigError, MapError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeFailure, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


# ---------------------------------------------------------------------------
# Config file reading. configparser does the parsing; the raw text is
# kept around so diagnostics can point at the offending line.


def _key_line(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip().lower()
        elif current == section.lower():
            match = re.match(r"([^=:;#]+)[=:]", stripped)
            if match and match.group(1).strip().lower() == key.lower():
                return lineno
    return None


def _section_line(text: str, section: str) -> int | None:
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            if stripped[1:-1].strip().lower() == section.lower():
                return lineno
    return None


class _ConfigReader:
    def __init__(self, path: str) -> None:
        self.path = path
        try:
            with open(path, encoding="utf-8") as handle:
                self.text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        self.parser = configparser.ConfigParser()
        try:
            self.parser.read_string(self.text, source=path)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        self._reject_unknown()

    def _reject_unknown(self) -> None:
        for section in self.parser.sections():
            if section not in _KNOWN_KEYS:
                line = _section_line(self.text, section)
                raise ConfigError(
                    f"{self.path} line {line}: unknown section [{section}]"
                )
            for key in self.parser.options(section):
                if key not in _KNOWN_KEYS[section]:
                    line = _key_line(self.text, section, key)
                    raise ConfigError(
                        f"{self.path} line {line}: unknown key {key!r} in [{section}]"
                    )

    def get(self, section: str, key: str, convert, default):
        if not self.parser.has_option(section, key):
            return default
        raw = self.parser.get(section, key).strip()
        if raw == "":
            return default
        try:
            return convert(raw)
        except ValueError as exc:
            line = _key_line(self.text, section, key)
            raise ConfigError(f"{self.path} line {line}: {key}: {exc}") from exc


def _parse_bool(raw: str) -> bool:
    states = configparser.ConfigParser.BOOLEAN_STATES
    if raw.lower() not in states:
        raise ValueError(f"expected a boolean, got {raw!r}")
    return states[raw.lower()]


def _parse_str_list(raw: str) -> list[str]:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ValueError("expected a comma-separated list")
    return items


def _parse_int_list(raw: str) -> list[int]:
    return [int(item) for item in _parse_str_list(raw)]


def _parse_mode_list(raw: str) -> list[str]:
    modes = [item.lower() for item in _parse_str_list(raw)]
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    return modes


def _load_run_settings(path: str) -> dict:
    conf = _ConfigReader(path)
    settings = {
        "maps": conf.get("run", "maps", _parse_str_list, None),
        "uavs": conf.get("run", "uavs", _parse_int_list, [1]),
        "modes": conf.get("run", "modes", _parse_mode_list, [LOCAL]),
        "seeds": conf.get("run", "seeds", _parse_int_list, list(DEFAULT_SEEDS)),
        "episodes": conf.get("run", "episodes", int, DEFAULT_MAX_EPISODES),
        "step_budget": conf.get("run", "step_budget", int, None),
        "output": conf.get("run", "output", str, "results.csv"),
        "log_traces": conf.get("run", "log_traces", _parse_bool, False),
        "parallelism": conf.get("run", "parallelism", int, 1),
        "epsilon": conf.get("training", "epsilon", float, DEFAULT_EPSILON),
        "epsilon_decay": conf.get(
            "training", "epsilon_decay", float, DEFAULT_EPSILON_DECAY
        ),
        "epsilon_min": conf.get("training", "epsilon_min", float, DEFAULT_EPSILON_MIN),
        "gamma": conf.get("training", "gamma", float, DEFAULT_GAMMA),
        "memory_size": conf.get("training", "memory_size", int, DEFAULT_MEMORY_SIZE),
        "learning_rate": conf.get(
            "training", "learning_rate", float, DEFAULT_LEARNING_RATE
        ),
        "batch_size": conf.get("training", "batch_size", int, DEFAULT_BATCH_SIZE),
        "allow_shared_cells": conf.get(
            "training", "allow_shared_cells", _parse_bool, False
        ),
    }
    if settings["maps"] is None:
        raise ConfigError(f"{path}: missing required key 'maps' in [run]")
    if settings["parallelism"] < 1:
        line = _key_line(conf.text, "run", "parallelism")
        raise ConfigError(f"{path} line {line}: parallelism must be positive")
    return settings


def _build_specs(settings: dict) -> list[ExperimentSpec]:
    """One spec per (map, uavs, mode), in the order the config lists them."""
    specs = []
    for map_name in settings["maps"]:
        grid = resolve_map(map_name)
        for n_uavs in settings["uavs"]:
            for mode in settings["modes"]:
                specs.append(
                    ExperimentSpec(
                        map_id=map_name,
                        grid=grid,
                        n_uavs=n_uavs,
                        mode=mode,
                        seeds=tuple(settings["seeds"]),
                        max_episodes=settings["episodes"],
                        step_budget=settings["step_budget"],
                        epsilon=settings["epsilon"],
                        epsilon_decay=settings["epsilon_decay"],
                        epsilon_min=settings["epsilon_min"],
                        gamma=settings["gamma"],
                        memory_size=settings["memory_size"],
                        learning_rate=settings["learning_rate"],
                        batch_size=settings["batch_size"],
                        allow_shared_cells=settings["allow_shared_cells"],
                        log_traces=settings["log_traces"],
                    )
                )
    return specs


def _resolve_output_path(output: str) -> str:
    base_dir = os.environ.get(OUTPUT_DIR_ENV)
    if base_dir and not os.path.isabs(output):
        output = os.path.join(base_dir, output)
    parent = os.path.dirname(output)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return output


def _format_cell(results: list[RunResult]) -> str:
    try:
        stats = aggregate(results)
    except AllRunsFailedError:
        return "no coverage"
    text = f"{stats.mean:.2f} ± {stats.std:.2f}"
    if stats.n_failed:
        text += f" ({stats.n_failed} failed)"
    return text


def _print_summary(jobs: list[tuple[ExperimentSpec, list[RunResult]]]) -> None:
    """Grid of mean ± std best totals: one row per map, one column per
    (uavs, mode) combination."""
    map_ids: list[str] = []
    combos: list[tuple[int, str]] = []
    cells: dict[tuple[str, tuple[int, str]], str] = {}
    for spec, results in jobs:
        combo = (spec.n_uavs, spec.mode)
        if spec.map_id not in map_ids:
            map_ids.append(spec.map_id)
        if combo not in combos:
            combos.append(combo)
        cells[(spec.map_id, combo)] = _format_cell(results)

    headers = ["map"] + [f"{n} uav {mode}" for n, mode in combos]
    table = [headers]
    for map_id in map_ids:
        table.append(
            [map_id] + [cells.get((map_id, combo), "-") for combo in combos]
        )
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    for row in table:
        print("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())


def cmd_run(args) -> int:
    settings = _load_run_settings(args.config)
    if args.output is not None:
        settings["output"] = args.output
    if args.seeds is not None:
        try:
            settings["seeds"] = _parse_int_list(args.seeds)
        except ValueError as exc:
            raise ConfigError(f"--seeds: {exc}") from exc
    if args.episodes is not None:
        settings["episodes"] = args.episodes
    if args.parallelism is not None:
        if args.parallelism < 1:
            raise ConfigError("--parallelism must be positive")
        settings["parallelism"] = args.parallelism
    if args.log_traces:
        settings["log_traces"] = True

    specs = _build_specs(settings)
    all_results = run_sweep(specs, settings["parallelism"])
    jobs = list(zip(specs, all_results))

    output_path = _resolve_output_path(settings["output"])
    rows = []
    for spec, results in jobs:
        rows.extend(results_rows(spec, results))
    with open(output_path, "w", encoding="utf-8", newline="") as handle:
        write_results_csv(handle, rows)

    written = [output_path]
    if settings["log_traces"]:
        entries = []
        for spec, results in jobs:
            entries.extend(trace_entries(spec, results))
        trace_path = output_path + TRACE_SUFFIX
        with open(trace_path, "w", encoding="utf-8") as handle:
            write_traces(handle, entries)
        written.append(trace_path)

    _print_summary(jobs)
    for path in written:
        print(f"wrote {path}")
    return 0


def _render_entry(entry: dict) -> str:
    """Replay a trace entry and draw the final picture: '#' obstacles,
    digits for final UAV positions, '▪' visited, '·' unvisited."""
    grid = parse_map(entry["map"])
    state = initial_swarm_state(grid, entry["n_uavs"])
    for uav, action in entry["moves"]:
        state, _ = transition(
            grid, state, uav, action, entry.get("allow_shared_cells", False)
        )
    position_digit = {}
    for index in reversed(range(state.n_uavs)):
        position_digit[state.positions[index]] = str(index + 1)
    lines = []
    for r in range(grid.rows):
        chars = []
        for c in range(grid.cols):
            if grid.obstacles[r, c]:
                chars.append("#")
            elif (r, c) in position_digit:
                chars.append(position_digit[(r, c)])
            elif state.visited[r, c]:
                chars.append(VISITED_CHAR)
            else:
                chars.append(UNVISITED_CHAR)
        lines.append("".join(chars))
    return "\n".join(lines)


def cmd_render(args) -> int:
    trace_path = args.csv + TRACE_SUFFIX
    try:
        with open(trace_path, encoding="utf-8") as handle:
            entries = json.load(handle)["traces"]
    except OSError as exc:
        raise RuntimeFailure(
            f"no trace sidecar at {trace_path} (was the run made with log_traces?): {exc}"
        ) from exc

    matches = [
        entry
        for entry in entries
        if entry["map_id"] == args.map
        and entry["seed"] == args.seed
        and (args.uavs is None or entry["n_uavs"] == args.uavs)
        and (args.mode is None or entry["mode"] == args.mode)
    ]
    if not matches:
        raise RuntimeFailure(
            f"no logged best episode matches map={args.map} seed={args.seed}"
        )
    entry = matches[0]
    if len(matches) > 1:
        print(
            f"note: {len(matches)} runs match; rendering "
            f"{entry['n_uavs']} uav {entry['mode']} (narrow with --uavs/--mode)",
            file=sys.stderr,
        )
    print(
        f"{entry['map_id']}  seed {entry['seed']}  {entry['n_uavs']} uav "
        f"{entry['mode']}  best episode {entry['best_episode']}: "
        f"{entry['total_actions']} actions"
    )
    print(_render_entry(entry))
    return 0


def cmd_maps(args) -> int:
    for map_id, note in BUNDLED_MAP_NOTES.items():
        grid = load_bundled_map(map_id)
        print(
            f"{map_id:<14} {grid.rows}x{grid.cols}  "
            f"{grid.free_count:>2} free cells  {note}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
