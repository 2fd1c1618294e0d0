"""
End-to-end campaigns: detector training, knowledge-base poisoning,
threshold pollution and the private-monitor sweep.

Every campaign writes its manifest first, fans the independent work units
out with joblib and writes the collected rows in canonical order, so the
CSV bytes do not depend on --jobs.
"""

import logging
import time
from dataclasses import asdict, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from attacks.dfoh_poisoning import execute_dfoh_attack, plan_dfoh_poisoning, poison_candidates
from attacks.model import AttackSpec, PlannerWeights, PoisonPlan
from attacks.oscillation import OscillationModel
from attacks.threshold_pollution import (
    FEASIBLE,
    PARTIAL,
    PollutionPlan,
    amplify,
    estimate_beam_threshold,
    evaluate_pollution,
    hijack_candidates,
    plan_threshold_pollution,
)
from countermeasures.monitors import sweep_detection
from detector_beam.embedding import EmbeddingParams, EmbeddingTable, hierarchy_agreement, train_embedding
from detector_beam.pipeline import BeamDetector
from detector_dfoh.corpus import PathCorpus
from detector_dfoh.features import CATEGORIES
from detector_dfoh.forest import feature_importances, fit_forest
from detector_dfoh.knowledge_base import KnowledgeBase
from detector_dfoh.pipeline import DfohDetector
from detector_dfoh.training import SamplingConfig, TrainingSet, build_training_set, cross_validate
from exceptions import DataError, DependencyError, InfeasiblePollutionError, NoPlanError
from harness.experiment_config import ExperimentConfig
from harness.results import ResultBundle, finalize_manifest, read_table, write_manifest, write_table
from harness.seeds import derive_seed
from harness.world import World, build_world
from models.model_store import save_embedding, save_forest, save_knowledge_base
from routing_sim.dynamics import generate_background_changes
from routing_sim.observation import write_route_dump
from routing_sim.routes import RouteChange
from topology.as_graph import AsGraph, Asn
from topology.metadata import write_metadata
from topology.relationships import write_irr_links, write_relationships

logger = logging.getLogger(__name__)

DFOH_COLUMNS = ['attacker', 'victim', 'evaded', 'links_used', 'suspicion_before', 'suspicion_after']
DFOH_DTYPES = {'attacker': 'int64', 'victim': 'int64', 'evaded': bool, 'links_used': 'int64',
               'suspicion_before': 'float64', 'suspicion_after': 'float64'}
TRACE_COLUMNS = ['attacker', 'victim', 'announcer', 'forged_origin']
FAILURE_COLUMNS = ['attacker', 'victim', 'error', 'message']
BEAM_COLUMNS = ['attacker', 'n_distinct', 'theta_before', 'theta_after', 'undetected_before', 'undetected_after']
ABLATION_SEEDS = 5


def _sample(items: Sequence[Asn], n: Optional[int], seed: int) -> List[Asn]:
    """Sorted sample of n items, or all of them when n is None or too large."""
    items = sorted(items)
    if n is None or n >= len(items):
        return items
    picked = np.random.default_rng(seed).choice(len(items), size=n, replace=False)
    return sorted(items[i] for i in picked)


def _start(config: ExperimentConfig, command: str) -> Tuple[Path, ResultBundle, float]:
    out = Path(config.out)
    manifest = write_manifest(out, config, command)
    return out, ResultBundle(out, manifest), time.perf_counter()


def _finish(bundle: ResultBundle, started: float) -> ResultBundle:
    finalize_manifest(bundle, time.perf_counter() - started)
    return bundle


def run_gen_topology(config: ExperimentConfig, world: Optional[World] = None) -> ResultBundle:
    """Write the world's relationships, metadata, IRR links, prefixes and day-0 route dump."""
    out, bundle, started = _start(config, 'gen-topology')
    world = world or build_world(config)
    (out / 'relationships.txt').write_text(write_relationships(world.graph))
    (out / 'metadata.json').write_text(write_metadata(world.metadata))
    (out / 'irr.txt').write_text(write_irr_links(world.irr_links))
    (out / 'routes.txt').write_text(write_route_dump(world.events))
    prefixes = pd.DataFrame([{'asn': asn, 'prefix': str(prefix), 'monitor': asn in world.monitors}
                             for asn, prefix in sorted(world.prefixes.items())], columns=['asn', 'prefix', 'monitor'])
    bundle.tables['prefixes'] = write_table(prefixes, out / 'prefixes.csv')
    bundle.summary = {'ases': len(world.graph), 'links': len(world.graph.edges), 'monitors': len(world.monitors),
                      'routes': len(world.events), 'irr_links': len(world.irr_links)}
    return _finish(bundle, started)


def _train_dfoh(world: World, config: ExperimentConfig) -> Tuple[DfohDetector, TrainingSet, SamplingConfig]:
    kb = KnowledgeBase.from_events(world.events, 0, config.dfoh.window_days)
    corpus = PathCorpus.from_events(world.events)
    sampling = SamplingConfig.from_dict(asdict(config.dfoh))
    data = build_training_set(kb, world.metadata, corpus, sampling.n_per_class,
                              derive_seed(config.seed, 'dfoh-training-set'), world.graph, world.irr_links)
    forest = fit_forest(data.X, data.y, sampling.n_trees, sampling.max_depth, derive_seed(config.seed, 'dfoh-forest'),
                        sampling.bootstrap_fraction, sampling.ablate, config.jobs)
    detector = DfohDetector(forest, kb, world.metadata, world.graph, world.irr_links, corpus,
                            config.dfoh.flag_threshold, config.dfoh.quarantine_days)
    return detector, data, sampling


def train_dfoh_detector(world: World, config: ExperimentConfig) -> DfohDetector:
    """Defender trained on the day-0 monitor view of the world."""
    return _train_dfoh(world, config)[0]


def run_dfoh_training(config: ExperimentConfig, world: Optional[World] = None) -> ResultBundle:
    """
    Train the DFOH-like detector and measure it.

    Saves the forest and knowledge base, writes per-category importances and
    cross-validated accuracy with each feature category ablated in turn.
    """
    out, bundle, started = _start(config, 'train-dfoh')
    world = world or build_world(config)
    detector, data, sampling = _train_dfoh(world, config)
    save_forest(detector.forest, out / 'forest.json')
    save_knowledge_base(detector.kb, out / 'knowledge_base.csv')

    importances = feature_importances(detector.forest)
    bundle.tables['dfoh_importances'] = write_table(
        pd.DataFrame(sorted(importances.items()), columns=['category', 'importance']), out / 'dfoh_importances.csv')

    rows = []
    for ablated in ['none', *CATEGORIES]:
        ablate = () if ablated == 'none' else (ablated,)
        for i in range(ABLATION_SEEDS):
            accuracy = cross_validate(data, sampling, derive_seed(config.seed, f'dfoh-cv-{i}'), ablate, config.jobs)
            rows.append({'ablated': ablated, 'seed_index': i, 'accuracy': accuracy})
    ablation = pd.DataFrame(rows, columns=['ablated', 'seed_index', 'accuracy'])
    bundle.tables['dfoh_ablation'] = write_table(ablation, out / 'dfoh_ablation.csv', ['ablated', 'seed_index'])
    mean = ablation.groupby('ablated')['accuracy'].mean()
    bundle.summary = {'training_samples': int(len(data.y)), 'kb_links': len(detector.kb.links),
                      'cv_accuracy': round(float(mean['none']), 6)}
    logger.info("DFOH detector: %d samples, accuracy %.3f", len(data.y), mean['none'])
    return _finish(bundle, started)


def _attack_from(world: World, detector: DfohDetector, config: ExperimentConfig, attacker: Asn,
                 victims: Sequence[Asn]) -> Tuple[List[Dict], List[Dict], List[Dict]]:
    """All pairs of one attacker; the attacker's surrogate is a white-box replica of the defender."""
    ctx = world.context
    attack = config.attack
    weights = PlannerWeights.from_dict(attack.weights)
    surrogate = detector
    candidates = poison_candidates(surrogate, attacker, surrogate.corpus.paths_to(attacker))
    rows, traces, failures = [], [], []
    for victim in victims:
        try:
            spec = AttackSpec(attacker, victim, world.prefixes[attacker], attack.budget,
                              attack.allow_transit_augmentation, attack.wait_days, attack.hijack_delay_days,
                              config.routing.announcement_lifetime_days)
            try:
                plan = plan_dfoh_poisoning(surrogate, spec, world.graph, weights, attack.lookahead, candidates)
            except NoPlanError as e:
                logger.debug("AS%d -> AS%d: %s", attacker, victim, e)
                plan = e.plan or PoisonPlan()
            result = execute_dfoh_attack(ctx, detector, plan, spec)
        except DataError as e:
            logger.warning("attack AS%d -> AS%d failed: %s", attacker, victim, e)
            failures.append({'attacker': attacker, 'victim': victim, 'error': type(e).__name__, 'message': str(e)})
            continue
        rows.append(result.to_row())
        traces.extend({'attacker': attacker, 'victim': victim, 'announcer': a, 'forged_origin': b}
                      for a, b in result.poison_links)
    logger.info("attacker AS%d: %d/%d pairs evaded", attacker, sum(r['evaded'] for r in rows), len(victims))
    return rows, traces, failures


def _dfoh_summary(results: pd.DataFrame) -> Dict:
    if results.empty:
        return {'pairs': 0}
    evaded = results[results['evaded']]
    diff = results['suspicion_after'] - results['suspicion_before']
    improved, worse = int((diff < 0).sum()), int((diff > 0).sum())
    summary = {
        'pairs': int(len(results)),
        'evasion_rate': round(float(results['evaded'].mean()), 6),
        'median_suspicion_before': round(float(results['suspicion_before'].median()), 6),
        'median_suspicion_after': round(float(results['suspicion_after'].median()), 6),
        'improved_fraction': round(improved / len(results), 6),
        'zero_link_evasion_fraction': round(float((evaded['links_used'] == 0).sum()) / len(results), 6),
    }
    if not evaded.empty:
        summary['evaders_within_two_links'] = round(float((evaded['links_used'] <= 2).mean()), 6)
    if improved + worse:
        summary['sign_test_p'] = float(stats.binomtest(improved, improved + worse, 0.5, alternative='greater').pvalue)
    return summary


def run_dfoh_campaign(config: ExperimentConfig, world: Optional[World] = None,
                      detector: Optional[DfohDetector] = None) -> ResultBundle:
    """
    Plan and execute knowledge-base poisoning for every attacker / victim pair.

    Attackers are sampled among ASes with observed routes, victims per
    attacker according to campaign.victims. Failed pairs go to
    dfoh_failures.csv and the campaign continues.

    Returns:
        ResultBundle: dfoh_attacks, dfoh_success_histogram,
        dfoh_links_histogram, dfoh_poison_traces, dfoh_failures
    """
    out, bundle, started = _start(config, 'attack-dfoh')
    world = world or build_world(config)
    campaign = config.campaign
    attackers = _sample(world.observed_origins(), campaign.n_attackers, derive_seed(config.seed, 'dfoh-attackers'))
    if attackers and detector is None:
        detector = train_dfoh_detector(world, config)
    nodes = sorted(world.graph.nodes)
    work = [(h, _sample([v for v in nodes if v != h], campaign.victim_sample(),
                        derive_seed(config.seed, f'dfoh-victims-{h}'))) for h in attackers]
    logger.info("DFOH campaign: %d attackers, %d pairs", len(work), sum(len(v) for _, v in work))

    outputs = Parallel(n_jobs=config.jobs)(delayed(_attack_from)(world, detector, config, h, victims)
                                           for h, victims in work)
    rows = [row for part in outputs for row in part[0]]
    traces = [row for part in outputs for row in part[1]]
    failures = [row for part in outputs for row in part[2]]

    results = pd.DataFrame(rows, columns=DFOH_COLUMNS).astype(DFOH_DTYPES)
    bundle.tables['dfoh_attacks'] = write_table(results, out / 'dfoh_attacks.csv', ['attacker', 'victim'])

    per_attacker = results.groupby('attacker').agg(n_victims=('victim', 'size'), n_evaded=('evaded', 'sum'))
    per_attacker['success_rate'] = per_attacker['n_evaded'] / per_attacker['n_victims']
    bundle.tables['dfoh_success_histogram'] = write_table(
        per_attacker.reset_index()[['attacker', 'n_victims', 'n_evaded', 'success_rate']],
        out / 'dfoh_success_histogram.csv', ['attacker'])

    evaded = results[results['evaded']]
    links = evaded.groupby('links_used').size().rename('n_pairs').reset_index()
    links['fraction'] = links['n_pairs'] / max(len(evaded), 1)
    bundle.tables['dfoh_links_histogram'] = write_table(links[['links_used', 'n_pairs', 'fraction']],
                                                        out / 'dfoh_links_histogram.csv', ['links_used'])

    bundle.tables['dfoh_poison_traces'] = write_table(pd.DataFrame(traces, columns=TRACE_COLUMNS),
                                                      out / 'dfoh_poison_traces.csv', ['attacker', 'victim'])
    bundle.tables['dfoh_failures'] = write_table(pd.DataFrame(failures, columns=FAILURE_COLUMNS),
                                                 out / 'dfoh_failures.csv', ['attacker', 'victim'])
    bundle.summary = _dfoh_summary(results)
    bundle.summary['failed_pairs'] = len(failures)
    logger.info("DFOH campaign done: %s", bundle.summary)
    return _finish(bundle, started)


def train_beam_embedding(world: World, config: ExperimentConfig) -> EmbeddingTable:
    params = EmbeddingParams.from_dict({**asdict(config.beam), 'lambda': config.beam.lam})
    return train_embedding(world.graph, params, derive_seed(config.seed, 'beam-embedding'))


def _background(world: World, config: ExperimentConfig, window: int, label: str) -> List[RouteChange]:
    w = config.beam.window_seconds
    return generate_background_changes(world.graph, world.prefixes, world.monitors, config.beam.background_changes,
                                       window * w, w, derive_seed(config.seed, label))


def run_beam_training(config: ExperimentConfig, world: Optional[World] = None) -> ResultBundle:
    """Train and save the role embedding, then warm the detector up on one window of background churn."""
    out, bundle, started = _start(config, 'train-beam')
    world = world or build_world(config)
    embedding = train_beam_embedding(world, config)
    save_embedding(embedding, out / 'embedding.txt')
    beam = config.beam
    detector = BeamDetector(embedding, beam.window_seconds, beam.k, beam.include_flagged)
    theta = detector.warm_up(_background(world, config, 0, 'beam-warmup'), end=beam.window_seconds)
    detector.run(_background(world, config, 1, 'beam-baseline'))
    bundle.tables['beam_scores'] = write_table(detector.score_log(), out / 'beam_scores.csv')
    bundle.summary = {'ases': len(embedding.asns), 'hierarchy_agreement': round(hierarchy_agreement(embedding,
                                                                                                     world.graph), 6),
                      'warmup_theta': round(float(theta), 6)}
    return _finish(bundle, started)


def _truncated(plan: PollutionPlan, n: int) -> PollutionPlan:
    kept = plan.announcements[:max(n, 0)]
    return replace(plan, announcements=kept, status=FEASIBLE if len(kept) == max(n, 0) else PARTIAL)


def _pollute_as(world: World, defender: BeamDetector, config: ExperimentConfig, theta_hat: float, attacker: Asn,
                baseline: Sequence[RouteChange]) -> List[Dict]:
    """Sweep n_distinct for one attacker; infeasible plans leave the window clean."""
    w = config.beam.window_seconds
    model = OscillationModel(**asdict(config.oscillation))
    reference = min((e.path for e in world.events if e.announcement.origin == attacker),
                    key=lambda p: (len(p) == 1, len(p), p))
    others = [v for v in sorted(world.graph.nodes) if v != attacker]
    victims = _sample(others, config.campaign.victim_sample(), derive_seed(config.seed, f'beam-victims-{attacker}'))
    candidates = hijack_candidates(world.events, [attacker], victims, time=w)
    n_range = config.campaign.n_distinct_range
    try:
        full = plan_threshold_pollution(defender.embedding, theta_hat, attacker, world.prefixes[attacker], reference,
                                        max(n_range), config.attack.epsilon)
    except InfeasiblePollutionError as e:
        logger.warning("AS%d cannot pollute: %s", attacker, e)
        full = None

    rows = []
    for n in n_range:
        polluted = list(baseline)
        if full is not None and n > 0:
            plan = _truncated(full, n)
            polluted += amplify(plan, model, derive_seed(config.seed, f'amplify-{attacker}-{n}'), w, w)
        result = evaluate_pollution(defender, baseline, polluted, candidates)
        rows.append({'attacker': attacker, 'n_distinct': n, 'theta_before': result.theta_before,
                     'theta_after': result.theta_after, 'undetected_before': result.undetected_before,
                     'undetected_after': result.undetected_after})
    return rows


def run_beam_campaign(config: ExperimentConfig, world: Optional[World] = None,
                      embedding: Optional[EmbeddingTable] = None) -> ResultBundle:
    """
    Threshold pollution against the BEAM-like detector.

    The defender warms up on window 0 of background churn; each attacker
    estimates the same threshold from the public stream and injects its
    amplified pollution into window 1 alongside the legitimate churn.

    Returns:
        ResultBundle: beam_pollution with one row per attacker and n_distinct
    """
    out, bundle, started = _start(config, 'attack-beam')
    world = world or build_world(config)
    beam = config.beam
    origins = world.observed_origins()
    attackers = _sample(origins, config.campaign.beam_attackers, derive_seed(config.seed, 'beam-attackers'))
    rows: List[Dict] = []
    if attackers:
        embedding = embedding or train_beam_embedding(world, config)
        warm = _background(world, config, 0, 'beam-warmup')
        baseline = _background(world, config, 1, 'beam-baseline')
        defender = BeamDetector(embedding, beam.window_seconds, beam.k, beam.include_flagged)
        defender.warm_up(warm, end=beam.window_seconds)
        theta_hat = estimate_beam_threshold(warm, embedding, beam.window_seconds, beam.k, end=beam.window_seconds)
        logger.info("BEAM campaign: %d attackers, estimated theta %.4f", len(attackers), theta_hat)
        outputs = Parallel(n_jobs=config.jobs)(
            delayed(_pollute_as)(world, defender, config, theta_hat, h, baseline) for h in attackers)
        rows = [row for part in outputs for row in part]

    results = pd.DataFrame(rows, columns=BEAM_COLUMNS)
    bundle.tables['beam_pollution'] = write_table(results, out / 'beam_pollution.csv', ['attacker', 'n_distinct'])
    if not results.empty:
        gain = (results['undetected_after'] - results['undetected_before']).groupby(results['n_distinct']).mean()
        smoothed = gain.rolling(3, min_periods=1).mean()
        bundle.summary = {
            'rows': int(len(results)),
            'mean_theta_increase': round(float((results['theta_after'] - results['theta_before']).mean()), 6),
            'mean_undetected_gain': round(float(gain.mean()), 6),
            'smoothed_gain_nondecreasing': bool(smoothed.is_monotonic_increasing),
        }
    else:
        bundle.summary = {'rows': 0}
    return _finish(bundle, started)


def load_poison_traces(out_dir: Path) -> List[Tuple[Asn, Asn]]:
    """
    Poison links recorded by a completed DFOH campaign.

    Raises:
        DependencyError: If the traces are missing or empty
    """
    traces = read_table(Path(out_dir) / 'dfoh_poison_traces.csv')
    if traces.empty:
        raise DependencyError(f"no poison links recorded in {out_dir}; run attack-dfoh with a nonzero budget first")
    return [(int(a), int(b)) for a, b in zip(traces['announcer'], traces['forged_origin'])]


def run_monitor_sweep(config: ExperimentConfig, graph: Optional[AsGraph] = None,
                      traces: Optional[Sequence[Tuple[Asn, Asn]]] = None) -> ResultBundle:
    """
    Detection rate of random and best-case private monitors over the m grid.

    Args:
        config (ExperimentConfig): Resolved config; traces are read from its
            output directory when not given
        graph (AsGraph, optional): Topology monitors are drawn from
        traces (list, optional): Poison links of a DFOH campaign

    Raises:
        DependencyError: If no poison traces are available
    """
    out = Path(config.out)
    if traces is None:
        traces = load_poison_traces(out)
    if not traces:
        raise DependencyError("monitor sweep needs the poison traces of a DFOH campaign")
    out, bundle, started = _start(config, 'eval-monitors')
    graph = graph or build_world(config).graph
    frame = sweep_detection(list(traces), graph, config.monitors.m_grid, config.monitors.trials,
                            derive_seed(config.seed, 'monitor-sweep'))
    bundle.tables['monitor_sweep'] = write_table(frame, out / 'monitor_sweep.csv', ['strategy', 'm', 'trial'])
    means = frame.groupby(['strategy', 'm'])['detection_rate'].mean()
    bundle.summary = {f'{strategy}@{m}': round(float(rate), 6) for (strategy, m), rate in means.items()}
    return _finish(bundle, started)
