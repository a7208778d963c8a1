"""Command-line entry point: ``blockleague fit | indices | simulate | oracle | summarize``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd

from blockleague import __version__
from blockleague.exceptions import (
    BlockLeagueError,
    ConfigurationError,
    DegenerateSeason,
    InvalidState,
    TooLarge,
)
from blockleague.indices import (
    index_report,
    index_vs_posterior,
    linear_trend,
    reports_frame,
)
from blockleague.league import outcome_shares, read_season
from blockleague.model import DEFAULT_K_MAX, PriorConfig
from blockleague.oracle import DEFAULT_BUDGET, exact_posterior_oracle
from blockleague.posterior import (
    DEFAULT_THRESHOLD,
    PosteriorSummary,
    interaction_posterior,
    map_allocation,
    ordered_results_grid,
    orient_trace,
    roster_table,
    summarize,
    top_block_size_series,
)
from blockleague.relabel import relabel_trace
from blockleague.reporting import (
    MANIFEST_COMMENT,
    InputFile,
    RunManifest,
    read_json,
    write_frame,
    write_json,
)
from blockleague.sampler import SamplerConfig, Trace, run_sampler
from blockleague.simulate import SimulationConfig, simulate_season
from blockleague.utils import total_variation

if TYPE_CHECKING:
    from collections.abc import Sequence

    from blockleague.league import ResultsMatrix
    from blockleague.posterior import InteractionPosterior
    from blockleague.relabel import RelabeledTrace
    from blockleague.types import JSONDict

logger = logging.getLogger(__name__)

SEED_ENV = 'BLOCK_LEAGUE_SEED'
EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
ALLOCATION_TABLE_KS = (2, 3)


def exit_code_for(exc: BaseException) -> int:
    """1 for input problems, 2 for numerical or budget problems."""
    if isinstance(exc, TooLarge | InvalidState | DegenerateSeason):
        return EXIT_NUMERIC
    return EXIT_INPUT


def resolve_seed(seed: int | None) -> int:
    """``--seed``, else ``$BLOCK_LEAGUE_SEED``, else 1."""
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        msg = f'{SEED_ENV} must be an integer, got {env!r}'
        raise ConfigurationError(msg) from None


def season_paths(args: argparse.Namespace) -> list[Path]:
    """Files from repeated ``--season`` flags followed by ``--dir``'s CSV files, sorted."""
    paths = [Path(p) for p in args.season or []]
    if args.dir is not None:
        directory = Path(args.dir)
        if not directory.is_dir():
            msg = f'{directory} is not a directory'
            raise ConfigurationError(msg)
        paths.extend(sorted(directory.glob('*.csv')))
    if not paths:
        msg = 'no seasons given (use --season or --dir)'
        raise ConfigurationError(msg)
    return paths


def prior_from_args(args: argparse.Namespace) -> PriorConfig:
    """Prior configuration from ``--prior``, ``--k-max`` and ``--poisson-rate``."""
    return PriorConfig(k_prior=args.prior, k_max=args.k_max, poisson_rate=args.poisson_rate)


@dataclass
class SeasonOutcome:
    """What one season's pipeline produced; picklable for worker processes."""

    season: str
    summary: JSONDict | None = None
    error: str | None = None
    exit_code: int = EXIT_OK


def summary_document(
    season: str,
    summary: PosteriorSummary,
    manifest_hash: str,
    map_k: int | None = None,
    interactions: InteractionPosterior | None = None,
) -> JSONDict:
    """Summary JSON shared by ``fit``, ``summarize`` and ``oracle``."""
    doc = summary.to_dict()
    doc.update({'season': season, 'manifest_hash': manifest_hash, 'map_k': map_k})
    if interactions is not None:
        doc['interactions'] = interactions.to_dict()
    return doc


def fit_season(
    path: Path,
    prior: PriorConfig,
    cfg: SamplerConfig,
    threshold: float,
    points_per_win: int,
    out_dir: Path,
) -> SeasonOutcome:
    """Sample, relabel, orient and summarize one season, writing its files."""
    season = path.stem
    try:
        started = time.perf_counter()
        results = read_season(path)
        manifest = RunManifest(
            command='fit',
            version=__version__,
            inputs=(InputFile.from_path(path),),
            prior=prior,
            sampler=cfg,
            points_per_win=points_per_win,
            threshold=threshold,
            output_dir=str(out_dir),
        )
        digest = manifest.manifest_hash

        trace = run_sampler(results, prior, cfg)
        trace.to_csv(out_dir / f'{season}.trace.csv', manifest_hash=digest)
        oriented = orient_trace(relabel_trace(trace), results)
        summary = summarize(oriented, threshold=threshold, k_max=prior.k_max)

        map_k = int(np.argmax(summary.k_probs)) + 1
        interactions = _write_season_tables(
            season, results, oriented, summary, map_k, prior, out_dir, digest
        )
        doc = summary_document(season, summary, digest, map_k, interactions)
        write_json(out_dir / f'{season}.summary.json', doc)

        manifest.wall_clock_seconds = time.perf_counter() - started
        manifest.acceptance = {
            'pooled': trace.acceptance,
            'chains': list(trace.chain_acceptance),
        }
        write_json(out_dir / f'{season}.manifest.json', manifest.to_dict())
        logger.info(
            '%s: pi(K|y) = %s, top block %d team(s)',
            season,
            np.round(summary.k_probs[: max(map_k + 1, 3)], 3).tolist(),
            summary.top_block_size,
        )
        return SeasonOutcome(season=season, summary=doc)
    except (BlockLeagueError, OSError) as e:
        logger.error('%s failed: %s', season, e)
        return SeasonOutcome(season=season, error=str(e), exit_code=exit_code_for(e))


def _write_season_tables(
    season: str,
    results: ResultsMatrix,
    oriented: RelabeledTrace,
    summary: PosteriorSummary,
    map_k: int,
    prior: PriorConfig,
    out_dir: Path,
    digest: str,
) -> InteractionPosterior:
    write_frame(out_dir / f'{season}.marginals.csv', summary.marginal_frame(), digest)
    for k in ALLOCATION_TABLE_KS:
        if k in summary.alloc_probs_given_k:
            write_frame(
                out_dir / f'{season}.alloc_k{k}.csv', summary.allocation_table(k), digest
            )
    best = map_allocation(oriented, map_k)
    posterior = interaction_posterior(results, best.z, best.k, prior.beta)
    write_frame(out_dir / f'{season}.interactions.csv', posterior.to_frame(), digest)
    write_frame(
        out_dir / f'{season}.grid.csv', ordered_results_grid(results, best.z), digest, index=True
    )
    return posterior


def _batch_manifest(
    command: str, paths: Sequence[Path], args: argparse.Namespace, **kwargs: Any
) -> RunManifest:
    inputs = tuple(InputFile.from_path(p) for p in paths if p.is_file())
    return RunManifest(
        command=command,
        version=__version__,
        inputs=inputs,
        output_dir=str(args.out),
        **kwargs,
    )


def cmd_fit(args: argparse.Namespace) -> int:
    """Fit every season and write per-season files plus the batch tables."""
    paths = season_paths(args)
    prior = prior_from_args(args)
    jobs = max(1, args.jobs)
    cfg = SamplerConfig(
        iterations=args.iters,
        burn_in=args.burn_in,
        rng_seed=resolve_seed(args.seed),
        thinning=args.thinning,
        chains=args.chains,
        progress=args.progress and jobs == 1,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    call = (prior, cfg, args.threshold, args.points_scheme, out_dir)

    if jobs == 1 or len(paths) == 1:
        outcomes = [fit_season(p, *call) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(fit_season, p, *call) for p in paths]
            outcomes = [f.result() for f in futures]

    fitted = {
        o.season: PosteriorSummary.from_dict(o.summary) for o in outcomes if o.summary is not None
    }
    if len(paths) > 1 and fitted:
        manifest = _batch_manifest(
            'fit-batch',
            paths,
            args,
            prior=prior,
            sampler=cfg,
            points_per_win=args.points_scheme,
            threshold=args.threshold,
        )
        write_batch_tables(fitted, out_dir, manifest.manifest_hash)
        write_json(out_dir / 'manifest.json', manifest.to_dict())

    failed = [o for o in outcomes if o.error is not None]
    if failed:
        logger.error('%d of %d season(s) failed', len(failed), len(outcomes))
        return max(o.exit_code for o in failed)
    return EXIT_OK


def _stack(frames: dict[str, pd.DataFrame]) -> pd.DataFrame:
    return pd.concat(
        [frame.assign(season=season) for season, frame in frames.items()], ignore_index=True
    )


def write_batch_tables(
    summaries: dict[str, PosteriorSummary], out_dir: Path, digest: str
) -> None:
    """K table, marginals, top-block sizes and the team × season roster table."""
    k_long = _stack({season: s.k_table() for season, s in summaries.items()})
    k_wide = (
        k_long.pivot(index='season', columns='k', values='percent')
        .reindex(list(summaries))
        .rename(columns=lambda k: f'K={k}')
        .rename_axis(columns=None)
        .reset_index()
    )
    marginals = _stack({season: s.marginal_frame() for season, s in summaries.items()})
    write_frame(out_dir / 'k_table.csv', k_wide, digest)
    write_frame(out_dir / 'marginals.csv', marginals[['season', 'team', 'marginal']], digest)
    write_frame(
        out_dir / 'top_block_sizes.csv', top_block_size_series(summaries).reset_index(), digest
    )
    write_frame(out_dir / 'rosters.csv', roster_table(summaries), digest, index=True)


def cmd_indices(args: argparse.Namespace) -> int:
    """Balance indices per season, with the posterior overlay when summaries are given."""
    paths = season_paths(args)
    out_dir = Path(args.out)
    manifest = _batch_manifest('indices', paths, args, points_per_win=args.points_scheme)
    digest = manifest.manifest_hash

    reports = []
    for path in paths:
        results = read_season(path)
        reports.append(index_report(path.stem, results, args.points_scheme))
        write_frame(out_dir / f'{path.stem}.outcome_shares.csv', outcome_shares(results), digest)

    k1_probs: dict[str, float] = {}
    if args.summaries is not None:
        for rep in reports:
            summary_path = Path(args.summaries) / f'{rep.season}.summary.json'
            if summary_path.is_file():
                k1_probs[rep.season] = PosteriorSummary.from_dict(read_json(summary_path)).pi_k1
            else:
                logger.warning('no summary for %s in %s', rep.season, args.summaries)

    write_frame(out_dir / 'indices.csv', reports_frame(reports, k1_probs), digest)
    if len(reports) >= 2:
        trends = {
            'hhicb_slope': linear_trend([r.hhicb for r in reports]),
            'relative_entropy_slope': linear_trend([r.relative_entropy for r in reports]),
            'manifest_hash': digest,
        }
        write_json(out_dir / 'trends.json', trends)
    if k1_probs:
        overlay = index_vs_posterior(reports, k1_probs)
        overlay['manifest_hash'] = digest
        write_json(out_dir / 'overlay.json', overlay)
    elif args.summaries is not None:
        logger.warning('no fitted summaries matched; overlay omitted')
    write_json(out_dir / 'manifest.json', manifest.to_dict())
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Write a synthetic season, its planted truth and the run manifest."""
    sizes = tuple(int(v) for v in args.sizes.split(','))
    interactions = None
    inputs: tuple[InputFile, ...] = ()
    if args.interactions is not None:
        interactions = np.asarray(read_json(args.interactions), dtype=np.float64)
        inputs = (InputFile.from_path(args.interactions),)
    seed = resolve_seed(args.seed)
    cfg = SimulationConfig(
        block_sizes=sizes,
        interactions=interactions,
        separation=args.separation,
        rng_seed=seed,
    )
    out_dir = Path(args.out)
    manifest = RunManifest(
        command='simulate',
        version=__version__,
        inputs=inputs,
        extra={
            'block_sizes': list(cfg.block_sizes),
            'separation': args.separation,
            'rng_seed': seed,
            'name': args.name,
        },
        output_dir=str(out_dir),
    )
    digest = manifest.manifest_hash
    simulated = simulate_season(cfg)

    out_dir.mkdir(parents=True, exist_ok=True)
    season_file = out_dir / f'{args.name}.csv'
    season_file.write_text(
        f'{MANIFEST_COMMENT}{digest}\n' + simulated.results.to_outcome_csv(), encoding='utf-8'
    )
    truth = simulated.truth_dict()
    truth['manifest_hash'] = digest
    write_json(out_dir / f'{args.name}.truth.json', truth)
    write_json(out_dir / f'{args.name}.manifest.json', manifest.to_dict())
    logger.info('wrote %s', season_file)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    """Exact posterior summary of a small season."""
    path = Path(args.season)
    results = read_season(path)
    prior = prior_from_args(args)
    out_dir = Path(args.out)
    manifest = RunManifest(
        command='oracle',
        version=__version__,
        inputs=(InputFile.from_path(path),),
        prior=prior,
        threshold=args.threshold,
        extra={'budget': args.budget},
        output_dir=str(out_dir),
    )
    summary = exact_posterior_oracle(results, prior, args.threshold, args.budget)
    doc = summary_document(path.stem, summary, manifest.manifest_hash)
    if args.compare is not None:
        fitted = PosteriorSummary.from_dict(read_json(args.compare))
        doc['tv_distance_k'] = total_variation(summary.k_probs, fitted.k_probs)
        logger.info('total variation against %s: %.4f', args.compare, doc['tv_distance_k'])
    write_json(out_dir / f'{path.stem}.oracle.json', doc)
    write_json(out_dir / f'{path.stem}.oracle.manifest.json', manifest.to_dict())
    return EXIT_OK


def cmd_summarize(args: argparse.Namespace) -> int:
    """Re-summarize a stored trace with a new threshold."""
    trace_path = Path(args.trace)
    season_path = Path(args.season)
    results = read_season(season_path)
    trace = Trace.from_csv(trace_path)
    out_dir = Path(args.out)
    manifest = RunManifest(
        command='summarize',
        version=__version__,
        inputs=(InputFile.from_path(trace_path), InputFile.from_path(season_path)),
        threshold=args.threshold,
        extra={'k_max': args.k_max},
        output_dir=str(out_dir),
    )
    oriented = orient_trace(relabel_trace(trace), results)
    k_max = max(args.k_max, int(trace.k.max()))
    summary = summarize(oriented, threshold=args.threshold, k_max=k_max)
    map_k = int(np.argmax(summary.k_probs)) + 1
    best = map_allocation(oriented, map_k)
    interactions = interaction_posterior(results, best.z, best.k)
    stem = season_path.stem
    doc = summary_document(stem, summary, manifest.manifest_hash, map_k, interactions)
    write_json(out_dir / f'{stem}.summary.json', doc)
    write_json(out_dir / f'{stem}.summarize.manifest.json', manifest.to_dict())
    return EXIT_OK


def _add_season_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--season', action='append', metavar='CSV', help='season file (repeatable)'
    )
    parser.add_argument('--dir', help='directory of season CSV files')


def _add_prior(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--k-max', type=int, default=DEFAULT_K_MAX, help='largest K')
    parser.add_argument('--prior', choices=['poisson', 'uniform'], default='poisson')
    parser.add_argument(
        '--poisson-rate', type=float, default=1.0, help='rate of the truncated Poisson prior'
    )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline stage."""
    parser = argparse.ArgumentParser(
        prog='blockleague',
        description='Stochastic block model analysis of league competitive balance.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument(
        '--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR']
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='shortcut for DEBUG')
    sub = parser.add_subparsers(dest='command', required=True)

    fit = sub.add_parser('fit', help='sample the block model posterior of each season')
    _add_season_inputs(fit)
    _add_prior(fit)
    fit.add_argument('--iters', type=int, default=200_000)
    fit.add_argument('--burn-in', type=int, default=50_000)
    fit.add_argument('--seed', type=int, default=None, help=f'falls back to ${SEED_ENV}')
    fit.add_argument('--chains', type=int, default=1)
    fit.add_argument('--thinning', type=int, default=1)
    fit.add_argument('--jobs', type=int, default=1, help='seasons fitted in parallel')
    fit.add_argument('--threshold', type=float, default=DEFAULT_THRESHOLD)
    fit.add_argument('--points-scheme', type=int, choices=[2, 3], default=3)
    fit.add_argument('--no-progress', dest='progress', action='store_false')
    fit.add_argument('--out', default='results')
    fit.set_defaults(handler=cmd_fit)

    indices = sub.add_parser('indices', help='HHICB and relative entropy per season')
    _add_season_inputs(indices)
    indices.add_argument('--points-scheme', type=int, choices=[2, 3], default=3)
    indices.add_argument('--summaries', help='directory of fitted summary JSON files')
    indices.add_argument('--out', default='results')
    indices.set_defaults(handler=cmd_indices)

    simulate = sub.add_parser('simulate', help='draw a synthetic season')
    simulate.add_argument('--sizes', required=True, help='comma-separated block sizes')
    group = simulate.add_mutually_exclusive_group()
    group.add_argument('--separation', type=float, default=None)
    group.add_argument('--interactions', help='JSON file holding a K×K×3 array')
    simulate.add_argument('--seed', type=int, default=None)
    simulate.add_argument('--name', default='simulated')
    simulate.add_argument('--out', default='results')
    simulate.set_defaults(handler=cmd_simulate)

    oracle = sub.add_parser('oracle', help='exact posterior by enumeration (small N)')
    oracle.add_argument('--season', required=True)
    _add_prior(oracle)
    oracle.set_defaults(k_max=3)
    oracle.add_argument('--threshold', type=float, default=DEFAULT_THRESHOLD)
    oracle.add_argument('--budget', type=int, default=DEFAULT_BUDGET)
    oracle.add_argument('--compare', help='fitted summary JSON to compare against')
    oracle.add_argument('--out', default='results')
    oracle.set_defaults(handler=cmd_oracle)

    summarize_cmd = sub.add_parser('summarize', help='summarize a stored trace')
    summarize_cmd.add_argument('--trace', required=True)
    summarize_cmd.add_argument('--season', required=True)
    summarize_cmd.add_argument('--threshold', type=float, default=DEFAULT_THRESHOLD)
    summarize_cmd.add_argument('--k-max', type=int, default=DEFAULT_K_MAX)
    summarize_cmd.add_argument('--out', default='results')
    summarize_cmd.set_defaults(handler=cmd_summarize)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, args.log_level),
        format=LOG_FORMAT,
        force=True,
    )
    try:
        return args.handler(args)
    except (BlockLeagueError, OSError) as e:
        logger.error('%s', e)
        return exit_code_for(e)


if __name__ == '__main__':
    sys.exit(main())
