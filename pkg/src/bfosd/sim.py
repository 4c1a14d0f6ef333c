"""Monte Carlo estimation of logical failure rates on matched shots.

Every shot draws its fault vector from its own counter-based stream keyed on
``(seed, shot_index)``, so results do not depend on how shots are split
across workers. Sectors of a CSS model are sampled in sorted-name order from
the same stream and decoded independently; a shot fails if any sector does.

Several decoders can be run on the same shots in one pass. BP and OSD-0 are
then computed once per shot and shared by every decoder that would compute
them identically, and best-first decoders that differ only in budget share a
single search (the pop sequence is budget-independent).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import oracle, osd
from .bp import BPConfig, SoftOutput, bp_decode_config
from .gf2 import BitVector
from .model import DecodingModel
from .osd import Candidate, DecoderConfig, OrderingConvention

log = logging.getLogger(__name__)

WILSON_Z95 = 1.959963984540054
_CHUNK = 256


class SyndromeMismatchError(RuntimeError):
    """A decoder returned a correction that does not reproduce the syndrome."""


class ConfigError(ValueError):
    pass


# -- sampling and scoring ------------------------------------------------------


def shot_rng(seed: int, shot_index: int) -> np.random.Generator:
    """Independent Philox stream for one shot."""
    if not 0 <= seed < 1 << 64:
        raise ConfigError("seed must lie in [0, 2**64)")
    if not 0 <= shot_index < 1 << 64:
        raise ConfigError("shot_index must lie in [0, 2**64)")
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(shot_index)))


def sample_shot(model: DecodingModel, rng: np.random.Generator) -> tuple[BitVector, BitVector, BitVector]:
    """Draw ``e_true`` column by column and return it with its syndrome and logical effect."""
    bits = (rng.random(model.n_columns) < model.priors).astype(np.uint8)
    e = BitVector.from_bits(bits)
    return e, model.h_dec @ e, model.logical_effects @ e


def is_logical_failure(model: DecodingModel, e_true: BitVector, e_hat: BitVector) -> bool:
    """True iff the residual ``e_true + e_hat`` flips a logical observable.

    Raises:
        SyndromeMismatchError: ``e_hat`` does not have the syndrome of ``e_true``.
    """
    residual = e_true ^ e_hat
    if (model.h_dec @ residual).any():
        raise SyndromeMismatchError("decoder output does not reproduce the syndrome")
    return bool((model.logical_effects @ residual).any())


def per_round_rate(p_shot: float, rounds: int) -> float:
    """Per-round rate ``1 - (1 - p_shot)**(1/rounds)``."""
    if not 0.0 <= p_shot <= 1.0:
        raise ValueError("p_shot must lie in [0, 1]")
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if rounds == 1:
        return float(p_shot)
    # expm1/log1p keep full relative precision for tiny rates
    return float(-math.expm1(math.log1p(-p_shot) / rounds)) if p_shot < 1.0 else 1.0


def wilson_interval(failures: int, shots: int, z: float = WILSON_Z95) -> tuple[float, float]:
    if shots <= 0:
        raise ValueError("shots must be positive")
    p = failures / shots
    denom = 1.0 + z * z / shots
    centre = (p + z * z / (2 * shots)) / denom
    half = z * math.sqrt(p * (1 - p) / shots + z * z / (4 * shots * shots)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == shots else min(1.0, centre + half)
    return lo, hi


# -- configuration -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimConfig:
    """One simulation point: models per sector, BP settings, decoder, shots and seed.

    ``rounds`` only enters the per-round conversion and defaults to the
    models' own round count. ``workers`` and the shot log flag do not affect
    results and are left out of the digest.
    """

    models: dict[str, DecodingModel]
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    bp: BPConfig = field(default_factory=BPConfig)
    shots: int = 1000
    seed: int = 0
    rounds: int | None = None
    workers: int = 1
    shot_log: bool = False
    code: str = ""

    @property
    def n_rounds(self) -> int:
        if self.rounds is not None:
            return int(self.rounds)
        return max(m.rounds for m in self.models.values())

    def digest(self) -> str:
        payload = {
            "models": {name: m.digest for name, m in sorted(self.models.items())},
            "bp": asdict(self.bp),
            "decoder": self.decoder.params(),
            "shots": int(self.shots),
            "seed": int(self.seed),
            "rounds": self.n_rounds,
        }
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @property
    def model_digest(self) -> str:
        text = ",".join(f"{name}:{m.digest}" for name, m in sorted(self.models.items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def validate(config: SimConfig) -> None:
    """Reject configurations before any shot runs."""
    if not config.models:
        raise ConfigError("at least one sector model is required")
    if int(config.shots) < 1:
        raise ConfigError("shots must be at least 1")
    if config.n_rounds < 1:
        raise ConfigError("rounds must be at least 1")
    if int(config.workers) < 1:
        raise ConfigError("workers must be at least 1")
    if not 0 <= int(config.seed) < 1 << 64:
        raise ConfigError("seed must lie in [0, 2**64)")
    for name, m in config.models.items():
        try:
            config.decoder.check(m.k)
        except ValueError as exc:
            raise ConfigError(f"sector {name!r}: {exc}") from None
        if config.decoder.variant == "oracle" and m.k > oracle.MAX_COSET_DIM:
            raise ConfigError(f"sector {name!r}: oracle cannot enumerate k={m.k} > {oracle.MAX_COSET_DIM}")
        if config.decoder.variant == "osd_w" and config.decoder.w > 24:
            raise ConfigError("osd_w with w > 24 is not supported")


# -- results ----------------------------------------------------------------------


@dataclass(frozen=True)
class ShotResult:
    """Per-shot outcome summed over sectors.

    ``queries_used`` counts candidates evaluated, ``found_at`` the evaluation
    index at which each sector's returned candidate first appeared (summed).
    """

    shot_index: int
    failure: bool
    decoder_cost: float
    queries_used: int
    bp_converged: bool
    found_at: int = 0


@dataclass(frozen=True, eq=False)
class RunStats:
    shots: int
    failures: int
    p_shot: float
    p_round: float
    ci_low: float
    ci_high: float
    config_digest: str
    seed: int
    rounds: int = 1
    decoder: str = ""
    params: dict = field(default_factory=dict)
    code: str = ""
    model_digest: str = ""
    mean_queries: float = 0.0
    mean_cost: float = 0.0
    bp_converged_rate: float = 0.0
    p_round_low: float = 0.0
    p_round_high: float = 0.0
    wall_time: float = 0.0
    shot_log: tuple[ShotResult, ...] | None = None

    def to_row(self) -> dict:
        return {
            "code": self.code,
            "model_digest": self.model_digest,
            "decoder": self.decoder,
            "params": json.dumps(self.params, sort_keys=True),
            "shots": self.shots,
            "failures": self.failures,
            "p_shot": self.p_shot,
            "p_round": self.p_round,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "p_round_low": self.p_round_low,
            "p_round_high": self.p_round_high,
            "rounds": self.rounds,
            "mean_queries": self.mean_queries,
            "mean_cost": self.mean_cost,
            "bp_converged_rate": self.bp_converged_rate,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "wall_time": self.wall_time,
        }


@dataclass(frozen=True)
class MatchedComparison:
    """Paired failure counts on identical shots; ``only_a`` means A failed and B did not."""

    label_a: str
    label_b: str
    shots: int
    failures_a: int
    failures_b: int
    both: int
    only_a: int
    only_b: int
    a_cheaper: int = 0
    b_cheaper: int = 0

    @property
    def discordant(self) -> int:
        return self.only_a + self.only_b

    def as_dict(self) -> dict:
        out = asdict(self)
        out["discordant"] = self.discordant
        return out


# -- per-shot decoding -------------------------------------------------------------


def _oracle_candidate(model: DecodingModel, syndrome: BitVector, llrs: np.ndarray, convention) -> Candidate:
    """Exact coset minimum of the same cost the OSD searches minimise."""
    convention = OrderingConvention.parse(convention)
    llrs = np.asarray(llrs, dtype=np.float64)
    if convention is OrderingConvention.CONFIDENCE:
        rec = osd.preflip(model.h_dec, syndrome, llrs)
        res = oracle.coset_min(model.h_dec, rec.adjusted_syndrome, rec.adjusted_llrs)
        error = res.argmin ^ rec.flips
    else:
        res = oracle.coset_min(model.h_dec, syndrome, np.abs(llrs))
        error = res.argmin
    return Candidate(error, res.minimum_cost, (), res.enumerated, res.enumerated, "oracle")


def _groups(decoders: list[DecoderConfig], bps: list[BPConfig]):
    """Bucket decoder indices that can share BP, OSD-0 and (for BF) one search."""
    groups: dict[tuple, list[int]] = {}
    for i, (d, b) in enumerate(zip(decoders, bps)):
        conv = OrderingConvention.parse(d.convention).value
        if d.variant == "bf_osd":
            key = (b, "bf", conv, d.expansion)
        else:
            key = (b, "one", conv, i)
        groups.setdefault(key, []).append(i)
    return groups


def _decode_sector(model, syndrome, decoders, bps, groups):
    """Run every decoder on one sector syndrome; returns candidates and BP convergence flags."""
    softs: dict[BPConfig, SoftOutput] = {}
    bases: dict[tuple, osd.BaseSolution] = {}
    out: list[Candidate | None] = [None] * len(decoders)
    conv_flags = [False] * len(decoders)

    def soft_for(b):
        if b not in softs:
            softs[b] = bp_decode_config(model, syndrome, b)
        return softs[b]

    def base_for(b, conv):
        key = (b, conv)
        if key not in bases:
            bases[key] = osd.osd0(model, syndrome, soft_for(b), conv)
        return bases[key]

    for (b, kind, conv, extra), members in groups.items():
        soft = soft_for(b)
        for i in members:
            conv_flags[i] = soft.converged
        pending = []
        for i in members:
            d = decoders[i]
            if d.fast_path and osd.is_trivial(syndrome, soft.llrs):
                out[i] = osd.zero_candidate(model.n_columns, d.label())
            else:
                pending.append(i)
        if not pending:
            continue
        if kind == "bf":
            base = base_for(b, conv)
            budgets = [decoders[i].resolve_budget(base.k) for i in pending]
            cands = osd.bf_osd_budgets(base, budgets, extra)
            for i, c in zip(pending, cands):
                out[i] = c
            continue
        for i in pending:
            d = decoders[i]
            if d.variant == "oracle":
                out[i] = _oracle_candidate(model, syndrome, soft.llrs, d.convention)
            else:
                out[i] = osd.search(base_for(b, conv), d)
    return out, conv_flags


@dataclass(frozen=True, eq=False)
class _Job:
    models: dict
    decoders: list
    bps: list
    seed: int


def _run_chunk(job: _Job, start: int, stop: int):
    """Decode shots ``start..stop-1``; returns per-decoder arrays."""
    n_dec = len(job.decoders)
    n = stop - start
    fail = np.zeros((n_dec, n), dtype=bool)
    cost = np.zeros((n_dec, n))
    queries = np.zeros((n_dec, n), dtype=np.int64)
    found = np.zeros((n_dec, n), dtype=np.int64)
    conv = np.ones((n_dec, n), dtype=bool)
    groups = _groups(job.decoders, job.bps)
    sectors = sorted(job.models)
    for t in range(n):
        rng = shot_rng(job.seed, start + t)
        draws = [(name, *sample_shot(job.models[name], rng)) for name in sectors]
        for name, e_true, syndrome, _ in draws:
            model = job.models[name]
            cands, flags = _decode_sector(model, syndrome, job.decoders, job.bps, groups)
            for i, c in enumerate(cands):
                if is_logical_failure(model, e_true, c.error):
                    fail[i, t] = True
                cost[i, t] += c.cost
                queries[i, t] += c.evaluated
                found[i, t] += c.queries_used
                conv[i, t] &= flags[i]
    return start, fail, cost, queries, found, conv


def simulate(models, decoders, bps, shots: int, seed: int, workers: int = 1):
    """Per-shot arrays ``(fail, cost, queries, found, converged)``, each ``(n_decoders, shots)``."""
    job = _Job(dict(models), list(decoders), list(bps), int(seed))
    chunks = [(s, min(s + _CHUNK, shots)) for s in range(0, shots, _CHUNK)]
    if workers <= 1 or len(chunks) <= 1:
        parts = [_run_chunk(job, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, job, a, b) for a, b in chunks]
            parts = [f.result() for f in futures]
    parts.sort(key=lambda p: p[0])
    return tuple(np.concatenate([p[i] for p in parts], axis=1) for i in range(1, 6))


def _stats(config: SimConfig, fail, cost, queries, found, conv, wall) -> RunStats:
    shots = int(config.shots)
    failures = int(fail.sum())
    p_shot = failures / shots
    lo, hi = wilson_interval(failures, shots)
    rounds = config.n_rounds
    log_rows = None
    if config.shot_log:
        log_rows = tuple(
            ShotResult(i, bool(fail[i]), float(cost[i]), int(queries[i]), bool(conv[i]), int(found[i]))
            for i in range(shots)
        )
    return RunStats(
        shots=shots,
        failures=failures,
        p_shot=p_shot,
        p_round=per_round_rate(p_shot, rounds),
        ci_low=lo,
        ci_high=hi,
        config_digest=config.digest(),
        seed=int(config.seed),
        rounds=rounds,
        decoder=config.decoder.label(),
        params={"decoder": config.decoder.params(), "bp": asdict(config.bp)},
        code=config.code,
        model_digest=config.model_digest,
        mean_queries=float(queries.mean()),
        mean_cost=float(cost.mean()),
        bp_converged_rate=float(conv.mean()),
        p_round_low=per_round_rate(lo, rounds),
        p_round_high=per_round_rate(hi, rounds),
        wall_time=wall,
        shot_log=log_rows,
    )


def run_matched(configs: list[SimConfig]) -> list[RunStats]:
    """Run several configurations on the same shots in one pass.

    All configurations must share models, shots and seed; BP settings and
    decoders may differ. ``wall_time`` is the time of the shared pass.

    Raises:
        ConfigError: mismatched models, shots or seed, or an invalid decoder.
    """
    if not configs:
        return []
    head = configs[0]
    for c in configs:
        validate(c)
        if c.model_digest != head.model_digest:
            raise ConfigError("matched runs need identical models")
        if c.shots != head.shots or c.seed != head.seed:
            raise ConfigError("matched runs need identical shots and seed")
    t0 = time.perf_counter()
    fail, cost, queries, found, conv = simulate(
        head.models,
        [c.decoder for c in configs],
        [c.bp for c in configs],
        int(head.shots),
        int(head.seed),
        max(int(c.workers) for c in configs),
    )
    wall = time.perf_counter() - t0
    log.info("matched pass: %d shots x %d decoders in %.1fs", head.shots, len(configs), wall)
    return [_stats(c, fail[i], cost[i], queries[i], found[i], conv[i], wall) for i, c in enumerate(configs)]


def run_monte_carlo(config: SimConfig) -> RunStats:
    """Simulate one configuration; ``shot_log`` is filled when ``config.shot_log`` is set."""
    return run_matched([config])[0]


def compare_matched(config_a: SimConfig, config_b: SimConfig, shots: int | None = None, seed: int | None = None):
    """Paired comparison of two decoders on byte-identical shots.

    Returns ``(stats_a, stats_b, comparison)``.

    Raises:
        ConfigError: the configurations reference different models.
    """
    if config_a.model_digest != config_b.model_digest:
        raise ConfigError("compare_matched needs both configs to use the same model")
    shots = int(config_a.shots if shots is None else shots)
    seed = int(config_a.seed if seed is None else seed)
    cfgs = [replace(c, shots=shots, seed=seed, shot_log=True) for c in (config_a, config_b)]
    sa, sb = run_matched(cfgs)
    fa = np.array([r.failure for r in sa.shot_log], dtype=bool)
    fb = np.array([r.failure for r in sb.shot_log], dtype=bool)
    ca = np.array([r.decoder_cost for r in sa.shot_log])
    cb = np.array([r.decoder_cost for r in sb.shot_log])
    cmp = MatchedComparison(
        label_a=config_a.decoder.label(),
        label_b=config_b.decoder.label(),
        shots=shots,
        failures_a=int(fa.sum()),
        failures_b=int(fb.sum()),
        both=int((fa & fb).sum()),
        only_a=int((fa & ~fb).sum()),
        only_b=int((~fa & fb).sum()),
        a_cheaper=int((ca < cb - 1e-9).sum()),
        b_cheaper=int((cb < ca - 1e-9).sum()),
    )
    if not config_a.shot_log:
        sa = replace(sa, shot_log=None)
    if not config_b.shot_log:
        sb = replace(sb, shot_log=None)
    return sa, sb, cmp
