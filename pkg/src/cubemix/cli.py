"""Command-line surface.

Exit codes: 0 success, 2 usage error, 3 solver budget exhausted,
4 memory guard refusal, 5 corrupt dataset manifest.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import corner_chain, pipeline, solver, stats
from .cube import (
    ORIGIN,
    MoveParseError,
    FaceletError,
    apply_sequence,
    format_moves,
    format_state,
    named_state,
    parse_moves,
    parse_state,
    validate,
)
from .errors import (
    BudgetExhaustedError,
    CorruptManifestError,
    CubemixError,
    MemoryGuardError,
)
from .rng import (
    PURPOSE_STATIONARY,
    PURPOSE_WALK,
    STEP_INF,
    random_moves,
    row_stream,
    uniform_state,
    walk,
)

EXIT_BUDGET = 3
EXIT_MEMORY = 4
EXIT_MANIFEST = 5

DEFAULT_SHALLOW_DEPTH = 14  # deeper optimal solves require --allow-deep or a budget


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


class _StepsType(click.ParamType):
    """Step list: 'a..b' ranges and comma-separated values; 'inf' allowed."""

    name = "steps"

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        steps = []
        for part in str(value).split(","):
            part = part.strip()
            if part.lower() == "inf":
                steps.append(pipeline.INF)
            elif ".." in part:
                a, b = part.split("..", 1)
                try:
                    lo, hi = int(a), int(b)
                except ValueError:
                    self.fail(f"bad range {part!r}", param, ctx)
                if hi < lo:
                    self.fail(f"empty range {part!r}", param, ctx)
                steps.extend(range(lo, hi + 1))
            else:
                try:
                    steps.append(int(part))
                except ValueError:
                    self.fail(f"bad step {part!r}", param, ctx)
        return steps


STEPS = _StepsType()


def _parse_state_arg(text: str):
    """A state given as a name, a facelet string, or a move word."""
    lowered = text.strip().lower()
    if lowered in ("solved", "origin", "superflip", "checkerboard"):
        return named_state("origin" if lowered == "solved" else lowered)
    stripped = text.replace(" ", "")
    if len(stripped) == 54 and not any(c in "123'" for c in stripped):
        return parse_state(stripped)
    return apply_sequence(ORIGIN, parse_moves(text))


pdb_dir_option = click.option(
    "--pdb-dir", type=click.Path(path_type=Path), default=None,
    help="Pattern-database directory (default: cache dir, see CUBEMIX_CACHE).",
)


@click.group()
@click.version_option(package_name="cubemix")
def main():
    """Random-walk scrambling analysis for the 3x3x3 cube.

    Simulates the 18-generator walk, computes exact move-count distances,
    estimates total-variation decay with bootstrap error bars, and
    cross-checks against the exactly evolved corner-projection chain.
    """


@main.command()
@click.option("--n", type=click.IntRange(0), required=True, help="Walk length.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--stream", type=int, default=0, show_default=True,
              help="Sample index within the seed's walk stream.")
def scramble(n, seed, stream):
    """Print a uniformly random n-move word (deterministic per seed/stream)."""
    rng = row_stream(seed, PURPOSE_WALK, n, stream)
    click.echo(format_moves(random_moves(rng, n)))


@main.command()
@click.argument("state")
@pdb_dir_option
@click.option("--budget-nodes", type=int, default=None, help="Node cap for IDA*.")
@click.option("--budget-seconds", type=float, default=None, help="Time cap for IDA*.")
@click.option("--allow-deep", is_flag=True,
              help="Permit solves beyond depth 14 without an explicit budget.")
def solve(state, pdb_dir, budget_nodes, budget_seconds, allow_deep):
    """Optimal solution of STATE (facelets, move word, or a named state).

    Named states: solved, superflip, checkerboard. Prints the distance and a
    minimal solution. Solves deeper than 14 can take hours; they require
    --allow-deep or a --budget-* flag.
    """
    try:
        target = _parse_state_arg(state)
    except (MoveParseError, FaceletError) as exc:
        raise click.UsageError(str(exc))
    max_depth = solver.MAX_DISTANCE
    if not allow_deep and budget_nodes is None and budget_seconds is None:
        max_depth = DEFAULT_SHALLOW_DEPTH
    pdbs = solver.load_or_build_pdbs(pdb_dir)
    result = solver.solve_optimal(
        target, pdbs, node_budget=budget_nodes,
        time_budget=budget_seconds, max_depth=max_depth,
    )
    click.echo(f"distance {result.distance}")
    click.echo(format_moves(result.solution))
    click.echo(f"nodes {result.nodes_expanded} elapsed {result.elapsed:.3f}s",
               err=True)


@main.command("walk-sample")
@click.option("--n", type=click.IntRange(0), required=True, help="Walk length.")
@click.option("--samples", type=click.IntRange(1), default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--stream", type=int, default=0, show_default=True,
              help="First sample index.")
def walk_sample(n, samples, seed, stream):
    """Print facelet strings of states after n random moves, one per line."""
    for i in range(stream, stream + samples):
        rng = row_stream(seed, PURPOSE_WALK, n, i)
        click.echo(format_state(walk(ORIGIN, n, rng)))


@main.command("stationary-sample")
@click.option("--samples", type=click.IntRange(1), default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--stream", type=int, default=0, show_default=True,
              help="First sample index.")
def stationary_sample(samples, seed, stream):
    """Print facelet strings of exactly-uniform states, one per line."""
    for i in range(stream, stream + samples):
        rng = row_stream(seed, PURPOSE_STATIONARY, STEP_INF, i)
        state = uniform_state(rng)
        assert not validate(state)
        click.echo(format_state(state))


@main.command()
@click.argument("file_a", type=click.Path(exists=True, path_type=Path))
@click.argument("file_b", type=click.Path(exists=True, path_type=Path))
@click.option("--resamples", type=click.IntRange(2), default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def tv(file_a, file_b, resamples, seed):
    """Bootstrap TV between two sample files (one distance 0..20 per line)."""
    def read(path):
        values = [int(line) for line in path.read_text().split()]
        if not values:
            raise click.UsageError(f"{path} holds no samples")
        return np.array(values)

    try:
        est = stats.bootstrap_tv(
            read(file_a), read(file_b), resamples=resamples,
            rng=row_stream(seed, 3, 0, 0),
        )
    except (ValueError, stats.SampleRangeError) as exc:
        raise click.UsageError(str(exc))
    click.echo(f"tv {est.point:.9g} +/- {est.stderr:.9g} "
               f"ci95 [{est.ci_low:.9g}, {est.ci_high:.9g}] "
               f"resamples {est.resamples}")


@main.command()
@click.argument("dataset_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--functional", type=click.Choice(pipeline.FUNCTIONALS),
              default="d_o", show_default=True)
@click.option("--resamples", type=click.IntRange(2), default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Output CSV (n,tv,stderr).")
def decay(dataset_dir, functional, resamples, seed, out):
    """Bootstrap TV decay curve of a dataset against its stationary rows."""
    try:
        curve = pipeline.emit_decay(dataset_dir, functional, out,
                                    resamples=resamples, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    for eps, n in stats.threshold_report(curve):
        click.echo(f"epsilon {eps:g}: "
                   + ("not reached" if n is stats.NOT_REACHED else f"n = {n}"))


@main.command()
@click.argument("dataset_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--functional", type=click.Choice(pipeline.FUNCTIONALS),
              default="d_o", show_default=True)
@click.option("--steps", type=STEPS, default=None,
              help="Steps to emit (default: all present). 'a..b', commas, 'inf'.")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Output directory for hist_NNN.csv files.")
def hist(dataset_dir, functional, steps, out):
    """Per-step distance histograms (CSV: distance,count,probability)."""
    try:
        result = pipeline.emit_histograms(dataset_dir, functional, steps, out)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    for n in sorted(result):
        label = "inf" if n == pipeline.INF else str(n)
        click.echo(f"n={label}: {result[n].total} samples")


@main.group()
def dataset():
    """Sharded, checkpointed, resumable sample datasets."""


@dataset.command("init")
@click.argument("dataset_dir", type=click.Path(path_type=Path))
@click.option("--seed", type=int, required=True, help="Root seed.")
@click.option("--steps", type=STEPS, required=True,
              help="Walk lengths, e.g. '1..52,inf' ('inf' = stationary rows).")
@click.option("--samples", type=click.IntRange(1), required=True,
              help="Samples per step.")
@click.option("--functional", "functionals", multiple=True,
              type=click.Choice(pipeline.FUNCTIONALS), default=("d_o",),
              show_default=True)
@click.option("--mode", type=click.Choice(["full", "corner"]),
              default="corner", show_default=True,
              help="corner: exact corner-projection distances; full: IDA* solves.")
@click.option("--shard-size", type=click.IntRange(1), default=10_000,
              show_default=True)
@click.option("--budget-nodes", type=int, default=None,
              help="Per-solve node cap (full mode).")
@click.option("--budget-seconds", type=float, default=None,
              help="Per-solve time cap (full mode).")
def dataset_init(dataset_dir, seed, steps, samples, functionals, mode,
                 shard_size, budget_nodes, budget_seconds):
    """Create a dataset directory with a manifest; no rows are computed yet."""
    try:
        manifest = pipeline.init_dataset(
            dataset_dir, root_seed=seed, steps=steps, samples_per_step=samples,
            functionals=list(functionals), mode=mode, shard_size=shard_size,
            budget_nodes=budget_nodes, budget_seconds=budget_seconds,
        )
    except (FileExistsError, ValueError) as exc:
        raise click.UsageError(str(exc))
    click.echo(f"initialized {manifest.total_rows} rows "
               f"in {len(manifest.shards)} shards at {dataset_dir}")


def _run_dataset(dataset_dir, threads, pdb_dir):
    manifest = pipeline.run_dataset(dataset_dir, threads=threads, pdb_dir=pdb_dir,
                                    progress=lambda i, rows: click.echo(
                                        f"shard {i} done ({rows} rows)", err=True))
    status = pipeline.dataset_status(dataset_dir)
    click.echo(f"done: {status['rows_done']}/{status['rows_total']} rows, "
               f"{status['budget_exhausted_rows']} budget-exhausted")
    return manifest


@dataset.command("run")
@click.argument("dataset_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--threads", type=click.IntRange(1), default=1, show_default=True)
@pdb_dir_option
def dataset_run(dataset_dir, threads, pdb_dir):
    """Compute all pending shards."""
    _run_dataset(dataset_dir, threads, pdb_dir)


@dataset.command("resume")
@click.argument("dataset_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--threads", type=click.IntRange(1), default=1, show_default=True)
@pdb_dir_option
def dataset_resume(dataset_dir, threads, pdb_dir):
    """Verify completed shards, then compute the remaining ones."""
    _run_dataset(dataset_dir, threads, pdb_dir)


@dataset.command("status")
@click.argument("dataset_dir", type=click.Path(exists=True, path_type=Path))
def dataset_status_cmd(dataset_dir):
    """Verify digests and print progress as JSON."""
    click.echo(json.dumps(pipeline.dataset_status(dataset_dir), indent=2))


@main.group()
def pdb():
    """Pattern databases for the optimal solver."""


@pdb.command("build")
@pdb_dir_option
def pdb_build(pdb_dir):
    """Build (or verify presence of) all three pattern databases."""
    pdbs = solver.load_or_build_pdbs(pdb_dir)
    for db in (pdbs.corners, pdbs.edges_a, pdbs.edges_b):
        click.echo(f"{db.kind}: {db.table.size} entries, max depth {db.table.max()}")


@pdb.command("info")
@pdb_dir_option
def pdb_info(pdb_dir):
    """Print header and depth histogram of each existing database file."""
    directory = Path(pdb_dir) if pdb_dir else solver.default_pdb_dir()
    found = False
    for kind in ("Corners", "EdgesA", "EdgesB"):
        path = solver.pdb_path(directory, kind)
        if not path.exists():
            continue
        found = True
        db = solver.PatternDatabase.load(path)
        hist_counts = np.bincount(db.table)
        click.echo(f"{kind}: {path} size {db.table.size} max {db.table.max()}")
        for d, c in enumerate(hist_counts):
            click.echo(f"  depth {d}: {c}")
    if not found:
        raise click.UsageError(f"no pattern databases under {directory}")


@main.group("exact-corner")
def exact_corner():
    """The exactly solvable corner-projection chain."""


@exact_corner.command("tables")
@pdb_dir_option
def exact_corner_tables(pdb_dir):
    """Build and cache the corner move tables (and report shapes)."""
    pt, ot = corner_chain.corner_move_tables(pdb_dir)
    click.echo(f"perm table {pt.shape}, orientation table {ot.shape}")


@exact_corner.command("bfs")
@pdb_dir_option
def exact_corner_bfs(pdb_dir):
    """Exact distance table over all 88,179,840 corner configurations."""
    table = corner_chain.corner_bfs(pdb_dir)
    click.echo(f"states {table.distances.size} diameter {table.diameter}")
    for d, c in enumerate(table.layer_counts()):
        click.echo(f"depth {d}: {c}")


@exact_corner.command("decay")
@click.option("--max-n", type=click.IntRange(0), default=60, show_default=True)
@click.option("--mode", type=click.Choice(["corner", "quotient"]),
              default="corner", show_default=True,
              help="corner: fixed centers; quotient: modulo whole-cube rotation.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the exact curve as CSV (n,tv,stderr empty).")
@pdb_dir_option
def exact_corner_decay(max_n, mode, out, pdb_dir):
    """Exact TV-to-uniform decay of the corner chain, with thresholds."""
    result = corner_chain.exact_decay(max_n, mode=mode, cache_dir=pdb_dir,
                                      progress=lambda n, tv, _:
                                      click.echo(f"n={n} tv={tv:.9g}", err=True))
    curve = stats.DecayCurve(source="exact")
    for n, value in zip(result.steps, result.tv_full):
        curve.append(n, value)
    if out is not None:
        curve.to_csv(out)
    for eps, n in sorted(result.thresholds.items(), reverse=True):
        click.echo(f"epsilon {eps:g}: "
                   + ("not reached" if n is None else f"n = {n}"))


@main.command()
@click.argument("curve_csv", type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the report as CSV (epsilon,n).")
def thresholds(curve_csv, out):
    """First epsilon-crossings of a decay curve CSV (n,tv,stderr)."""
    try:
        curve = stats.DecayCurve.from_csv(curve_csv)
    except (ValueError, KeyError) as exc:
        raise click.UsageError(f"bad curve file {curve_csv}: {exc}")
    report = stats.threshold_report(curve)
    if out is not None:
        stats.threshold_report_csv(report, out)
    for eps, n in report:
        click.echo(f"epsilon {eps:g}: "
                   + ("not reached" if n is stats.NOT_REACHED else f"n = {n}"))


def entry() -> int:
    try:
        main.main(standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 130
    except BudgetExhaustedError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_BUDGET
    except MemoryGuardError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_MEMORY
    except CorruptManifestError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_MANIFEST


if __name__ == "__main__":
    sys.exit(entry())
