"""Command-line front end: ``build-model``, ``decode``, ``simulate`` and ``compare``.

Every subcommand reads an optional JSON run configuration (``--config``) and
applies command-line overrides on top of it. Exit status is 0 on success, 2
for configuration errors and 3 for failures while running.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bp as bp_mod
from . import gf2, model, osd, sim

log = logging.getLogger("bfosd")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

CSV_COLUMNS = (
    "code",
    "model_digest",
    "decoder",
    "params",
    "shots",
    "failures",
    "p_shot",
    "p_round",
    "ci_low",
    "ci_high",
    "p_round_low",
    "p_round_high",
    "rounds",
    "mean_queries",
    "mean_cost",
    "bp_converged_rate",
    "seed",
    "config_digest",
    "wall_time",
)

DEFAULTS = {
    "sectors": ["x", "z"],
    "bp": {"iterations": 20, "schedule": "serial", "llr_max": bp_mod.LLR_MAX, "early_exit": False},
    "decoder": {"variant": "bf_osd"},
    "shots": 1000,
    "seed": 0,
    "workers": 1,
    "output": {},
}


class ConfigError(ValueError):
    pass


# -- configuration -----------------------------------------------------------------


@dataclass
class RunConfig:
    """Validated run configuration; ``raw`` is the merged JSON document."""

    code: dict | None
    noise: dict
    sectors: list
    bp: bp_mod.BPConfig
    decoder: osd.DecoderConfig
    shots: int
    seed: int
    workers: int
    output: dict
    sweep: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _one_of(section: dict | None, what: str, allowed: tuple[str, ...]) -> tuple[str, dict]:
    if section is None:
        raise ConfigError(f"missing {what} source (one of {', '.join(allowed)})")
    if not isinstance(section, dict):
        raise ConfigError(f"{what} must be an object")
    keys = [k for k in section if k in allowed]
    unknown = [k for k in section if k not in allowed]
    if unknown:
        raise ConfigError(f"unknown {what} source {unknown[0]!r}")
    if len(keys) != 1:
        raise ConfigError(f"exactly one {what} source is required, got {keys or 'none'}")
    return keys[0], section[keys[0]]


def parse_run_config(doc: dict) -> RunConfig:
    """Check a configuration document; raises :class:`ConfigError` on any inconsistency."""
    doc = _deep_merge(DEFAULTS, doc)
    noise_kind, noise_args = _one_of(doc.get("noise"), "noise", ("code_capacity", "phenomenological", "fault_list"))
    code = doc.get("code")
    if noise_kind != "fault_list":
        _one_of(code, "code", ("file", "bicycle"))
    elif code:
        _one_of(code, "code", ("file", "bicycle"))
    try:
        bp_cfg = bp_mod.BPConfig(**doc["bp"])
        dec_cfg = osd.DecoderConfig(**doc["decoder"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    shots, seed, workers = doc["shots"], doc["seed"], doc["workers"]
    if not isinstance(shots, int) or shots < 1:
        raise ConfigError(f"shots must be a positive integer, got {shots!r}")
    if not isinstance(seed, int) or not 0 <= seed < 1 << 64:
        raise ConfigError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"workers must be a positive integer, got {workers!r}")
    sectors = list(doc["sectors"])
    if not sectors or any(s not in ("x", "z") for s in sectors):
        raise ConfigError(f"sectors must be a non-empty subset of ['x', 'z'], got {sectors}")
    sweep = doc.get("sweep") or {}
    for key in sweep:
        if key not in ("p", "budget"):
            raise ConfigError(f"unknown sweep key {key!r} (expected 'p' or 'budget')")
        if not isinstance(sweep[key], list) or not sweep[key]:
            raise ConfigError(f"sweep {key!r} must be a non-empty list")
    if "p" in sweep and noise_kind == "fault_list":
        raise ConfigError("a p sweep needs a code_capacity or phenomenological noise source")
    return RunConfig(
        code=code,
        noise={noise_kind: noise_args},
        sectors=sectors,
        bp=bp_cfg,
        decoder=dec_cfg,
        shots=shots,
        seed=seed,
        workers=workers,
        output=dict(doc.get("output") or {}),
        sweep=sweep,
        raw=doc,
    )


def _parse_monomials(text: str) -> list:
    """``"3,0;0,1;0,2"`` -> ``[[3, 0], [0, 1], [0, 2]]``."""
    try:
        return [[int(v) for v in term.split(",")] for term in text.split(";") if term.strip()]
    except ValueError:
        raise ConfigError(f"bad monomial list {text!r}; expected 'i,j;i,j;...'") from None


def _overrides(args) -> dict:
    """Translate command-line flags into a partial configuration document."""
    doc: dict = {}

    def put(path, value):
        if value is None:
            return
        node = doc
        for key in path[:-1]:
            node = node.setdefault(key, {})
        node[path[-1]] = value

    g = vars(args)
    if g.get("code_file"):
        doc["code"] = {"file": g["code_file"]}
    if g.get("bicycle"):
        try:
            l_, m_ = (int(v) for v in g["bicycle"].split(","))
        except ValueError:
            raise ConfigError("--bicycle expects 'l,m'") from None
        if not g.get("a") or not g.get("b"):
            raise ConfigError("--bicycle needs both --a and --b monomial lists")
        if "code" in doc:
            raise ConfigError("conflicting code sources: --code-file and --bicycle")
        doc["code"] = {"bicycle": {"l": l_, "m": m_, "a": _parse_monomials(g["a"]), "b": _parse_monomials(g["b"])}}
        put(("code", "bicycle", "d"), g.get("distance"))
    noise_flags = [n for n in ("p", "p_data", "fault_list") if g.get(n) is not None]
    if len(noise_flags) > 1:
        raise ConfigError(f"conflicting noise sources: {noise_flags}")
    if g.get("p") is not None:
        doc["noise"] = {"code_capacity": {"p": g["p"]}}
    if g.get("p_data") is not None:
        doc["noise"] = {
            "phenomenological": {
                "p_data": g["p_data"],
                "p_meas": g["p_meas"] if g.get("p_meas") is not None else g["p_data"],
                "rounds": g.get("rounds") or 1,
            }
        }
    if g.get("fault_list") is not None:
        doc["noise"] = {"fault_list": {"path": g["fault_list"], "merge": g.get("merge") or "sum", "rounds": g.get("rounds") or 1}}
    if g.get("sectors"):
        doc["sectors"] = [s for s in g["sectors"].split(",") if s]
    put(("bp", "iterations"), g.get("bp_iterations"))
    put(("bp", "schedule"), g.get("schedule"))
    put(("bp", "llr_max"), g.get("llr_max"))
    if g.get("early_exit"):
        put(("bp", "early_exit"), True)
    put(("decoder", "variant"), g.get("decoder"))
    put(("decoder", "convention"), g.get("convention"))
    if g.get("budget") is not None:
        put(("decoder", "budget"), _budget_value(g["budget"]))
    put(("decoder", "budget_scale"), g.get("budget_scale"))
    put(("decoder", "budget_min"), g.get("budget_min"))
    put(("decoder", "lam"), g.get("lam"))
    put(("decoder", "w"), g.get("w"))
    put(("decoder", "expansion"), g.get("expansion"))
    put(("decoder", "selection"), g.get("selection"))
    if g.get("fast_path"):
        put(("decoder", "fast_path"), True)
    put(("shots",), g.get("shots"))
    put(("seed",), g.get("seed"))
    put(("workers",), g.get("workers"))
    put(("output", "csv"), g.get("csv"))
    put(("output", "json"), g.get("json"))
    put(("output", "shot_log"), g.get("shot_log"))
    put(("output", "model_dir"), g.get("out"))
    if g.get("sweep_p"):
        doc.setdefault("sweep", {})["p"] = [float(v) for v in g["sweep_p"].split(",")]
    if g.get("sweep_budget"):
        doc.setdefault("sweep", {})["budget"] = [_budget_value(v) for v in g["sweep_budget"].split(",")]
    return doc


def _budget_value(text):
    if isinstance(text, int) or text == "cs":
        return text
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"budget must be an integer or 'cs', got {text!r}") from None


def load_config(args) -> RunConfig:
    doc: dict = {}
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("the configuration must be a JSON object")
    over = _overrides(args)
    # a source given on the command line replaces the one in the file
    for key in ("code", "noise"):
        if key in over:
            doc.pop(key, None)
    return parse_run_config(_deep_merge(doc, over))


# -- model construction ------------------------------------------------------------


def build_code(source: dict) -> model.CSSCode:
    kind, args = _one_of(source, "code", ("file", "bicycle"))
    if kind == "file":
        return model.load_code(args)
    try:
        return model.build_bicycle(
            int(args["l"]),
            int(args["m"]),
            [tuple(t) for t in args["a"]],
            [tuple(t) for t in args["b"]],
            d=args.get("d"),
        )
    except KeyError as exc:
        raise ConfigError(f"bicycle code needs key {exc.args[0]!r}") from None


def build_models(cfg: RunConfig, p: float | None = None) -> tuple[model.CSSCode | None, dict]:
    """Models per sector for one noise point; ``p`` overrides the swept strength.

    Invalid parameters come back as :class:`ConfigError` carrying the
    underlying module's message.
    """
    try:
        return _build_models(cfg, p)
    except (model.CodeValidationError, model.FaultListError, FileNotFoundError):
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _build_models(cfg: RunConfig, p):
    kind, args = next(iter(cfg.noise.items()))
    if kind == "fault_list":
        m = model.load_fault_list(args["path"], mode=args.get("merge", "sum"), rounds=int(args.get("rounds", 1)))
        return None, {"dem": m}
    code = build_code(cfg.code)
    if kind == "code_capacity":
        return code, model.build_code_capacity(code, float(p if p is not None else args["p"]), cfg.sectors)
    p_data = float(p if p is not None else args["p_data"])
    p_meas = float(p if p is not None else args.get("p_meas", args["p_data"]))
    return code, model.build_phenomenological(code, p_data, p_meas, int(args.get("rounds", 1)), cfg.sectors)


def _code_label(cfg: RunConfig, code) -> str:
    if code is None:
        return Path(cfg.noise["fault_list"]["path"]).name
    d = f",{code.d}" if code.d is not None else ""
    return f"[[{code.n},{code.k}{d}]]"


# -- output ----------------------------------------------------------------------------


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def append_csv_row(path, row: dict) -> None:
    """Append one complete row; the file is replaced atomically so no partial row is ever visible."""
    path = Path(path)
    old = path.read_text() if path.exists() else ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    if not old:
        writer.writeheader()
    writer.writerow(row)
    _atomic_write(path, old + buf.getvalue())


def append_json_row(path, row: dict) -> None:
    path = Path(path)
    rows = json.loads(path.read_text()) if path.exists() else []
    rows.append(row)
    _atomic_write(path, json.dumps(rows, indent=1) + "\n")


def write_shot_log(path, stats: sim.RunStats) -> None:
    lines = ["shot_index,failure,cost,queries,found_at,bp_converged"]
    for r in stats.shot_log or ():
        lines.append(f"{r.shot_index},{int(r.failure)},{r.decoder_cost!r},{r.queries_used},{r.found_at},{int(r.bp_converged)}")
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1, default=_json_default))


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# -- subcommands -------------------------------------------------------------------


def cmd_build_model(cfg: RunConfig) -> dict:
    """Construct and save the models; returns the summary that is printed."""
    code, models = build_models(cfg)
    out_dir = cfg.output.get("model_dir")
    summary: dict = {"models": {}}
    if code is not None:
        summary.update({"N": code.n, "k": code.k, "d": code.d, "notes": list(code.notes)})
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if code is not None:
            model.save_code(out / "code.json", code)
    for name, m in models.items():
        entry = {
            "detectors": m.n_detectors,
            "columns": m.n_columns,
            "observables": m.n_observables,
            "rank": m.rank,
            "k": m.k,
            "digest": m.digest,
        }
        if out_dir:
            path = Path(out_dir) / f"model_{name}.json"
            model.save_model(path, m)
            entry["path"] = str(path)
        summary["models"][name] = entry
    return summary


def read_syndrome(text: str, length: int) -> gf2.BitVector:
    """Bit string (whitespace ignored) or ``indices:`` followed by comma/space separated detector indices."""
    text = text.strip()
    if text.startswith("indices:"):
        body = text[len("indices:") :].replace(",", " ").split()
        try:
            idx = [int(t) for t in body]
        except ValueError:
            raise ConfigError("syndrome indices must be integers") from None
        if any(not 0 <= i < length for i in idx):
            raise ConfigError(f"syndrome index out of range 0..{length - 1}")
        return gf2.BitVector.from_indices(length, idx)
    bits = "".join(text.split())
    if len(bits) != length or set(bits) - {"0", "1"}:
        raise ConfigError(f"syndrome must be {length} characters of 0/1, got {len(bits)}")
    return gf2.BitVector.from_string(bits)


def cmd_decode(m: model.DecodingModel, syndrome: gf2.BitVector, cfg: RunConfig, trace: bool = False) -> dict:
    soft = bp_mod.bp_decode_config(m, syndrome, cfg.bp)
    dec = cfg.decoder
    if dec.variant == "oracle":
        cand = sim._oracle_candidate(m, syndrome, soft.llrs, dec.convention)
    else:
        dec.check(m.k)
        cand = osd.decode(m, syndrome, soft, dec, record_trace=trace)
    out = {
        "decoder": cand.decoder,
        "cost": cand.cost,
        "error": [int(i) for i in cand.error.support()],
        "generator_set": list(cand.generator_set),
        "queries_used": cand.queries_used,
        "evaluated": cand.evaluated,
        "bp_converged": soft.converged,
        "logical_effect": (m.logical_effects @ cand.error).to_string(),
    }
    if trace and cand.trace is not None:
        out["trace"] = osd.format_trace(cand.trace).splitlines()
    return out


def _sim_configs(cfg: RunConfig, models: dict, code_label: str, rounds: int | None) -> list[sim.SimConfig]:
    budgets = cfg.sweep.get("budget") or [None]
    out = []
    for b in budgets:
        dec = cfg.decoder if b is None else osd.DecoderConfig(**{**cfg.decoder.params(), "budget": b})
        out.append(
            sim.SimConfig(
                models=models,
                decoder=dec,
                bp=cfg.bp,
                shots=cfg.shots,
                seed=cfg.seed,
                rounds=rounds,
                workers=cfg.workers,
                shot_log=bool(cfg.output.get("shot_log")),
                code=code_label,
            )
        )
    return out


def _point_config(cfg: RunConfig, p, sim_cfg: sim.SimConfig) -> dict:
    """Self-contained configuration document that reproduces one CSV row."""
    doc = copy.deepcopy(cfg.raw)
    doc.pop("sweep", None)
    doc.pop("output", None)
    doc.pop("workers", None)
    if p is not None:
        kind = next(iter(cfg.noise))
        if kind == "code_capacity":
            doc["noise"] = {"code_capacity": {"p": p}}
        else:
            args = dict(cfg.noise[kind], p_data=p, p_meas=p)
            doc["noise"] = {kind: args}
    doc["decoder"] = sim_cfg.decoder.params()
    return doc


def cmd_simulate(cfg: RunConfig) -> list[dict]:
    """One row per (p, budget) point; all budgets at a given p share one matched pass."""
    points = cfg.sweep.get("p") or [None]
    rows = []
    for p in points:
        code, models = build_models(cfg, p)
        configs = _sim_configs(cfg, models, _code_label(cfg, code), None)
        for c in configs:
            sim.validate(c)
        stats = sim.run_matched(configs)
        for c, s in zip(configs, stats):
            row = s.to_row()
            if cfg.output.get("csv"):
                append_csv_row(cfg.output["csv"], row)
            if cfg.output.get("json"):
                append_json_row(cfg.output["json"], {**row, "params": s.params, "config": _point_config(cfg, p, c)})
            if cfg.output.get("shot_log"):
                stem = Path(cfg.output["shot_log"])
                name = stem if len(stats) * len(points) == 1 else stem.with_name(f"{stem.stem}_{s.config_digest}{stem.suffix}")
                write_shot_log(name, s)
            log.info("%s p=%s: %d/%d failures", s.decoder, p, s.failures, s.shots)
            rows.append(row)
    return rows


def cmd_compare(cfg: RunConfig, dec_a: osd.DecoderConfig, dec_b: osd.DecoderConfig) -> dict:
    code, models = build_models(cfg)
    label = _code_label(cfg, code)
    base = sim.SimConfig(models, cfg.decoder, cfg.bp, cfg.shots, cfg.seed, workers=cfg.workers, code=label)
    ca = sim.replace(base, decoder=dec_a)
    cb = sim.replace(base, decoder=dec_b)
    sa, sb, cmp = sim.compare_matched(ca, cb)
    return {"a": sa.to_row(), "b": sb.to_row(), "comparison": cmp.as_dict()}


# -- argument parsing ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    g = p.add_argument_group("code source")
    g.add_argument("--code-file", help="css-code JSON sidecar")
    g.add_argument("--bicycle", metavar="L,M", help="bivariate bicycle code sizes")
    g.add_argument("--a", help="A monomials, e.g. '3,0;0,1;0,2'")
    g.add_argument("--b", help="B monomials")
    g.add_argument("--distance", type=int, help="declared code distance (not computed)")
    g = p.add_argument_group("noise source")
    g.add_argument("--p", type=float, help="code-capacity error rate")
    g.add_argument("--p-data", type=float, help="phenomenological data error rate")
    g.add_argument("--p-meas", type=float, help="phenomenological measurement error rate")
    g.add_argument("--rounds", type=int)
    g.add_argument("--fault-list", help="fault-list file")
    g.add_argument("--merge", choices=("sum", "xor"))
    g.add_argument("--sectors", help="comma separated subset of x,z")
    g = p.add_argument_group("decoder")
    g.add_argument("--bp-iterations", type=int)
    g.add_argument("--schedule", choices=bp_mod.SCHEDULES)
    g.add_argument("--llr-max", type=float)
    g.add_argument("--early-exit", action="store_true")
    g.add_argument("--decoder", choices=osd.VARIANTS)
    g.add_argument("--convention")
    g.add_argument("--budget", help="BF-OSD budget Q (integer or 'cs')")
    g.add_argument("--budget-scale", type=float)
    g.add_argument("--budget-min", type=int)
    g.add_argument("--lam", type=int, help="OSD-CS lambda")
    g.add_argument("--w", type=int, help="OSD-w order")
    g.add_argument("--expansion", choices=("eager", "lazy"))
    g.add_argument("--selection", choices=("llr", "weight"))
    g.add_argument("--fast-path", action="store_true")


def _add_run(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--csv", help="CSV file that rows are appended to")
    p.add_argument("--json", help="JSON mirror of the CSV rows")
    p.add_argument("--shot-log", help="per-shot log path")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bfosd", description="BP + ordered-statistics decoding toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-model", help="construct and save decoding models")
    _add_common(p)
    p.add_argument("--out", help="output directory for model files")

    p = sub.add_parser("decode", help="decode one syndrome")
    _add_common(p)
    p.add_argument("--model", required=True, help="decoding-model JSON file")
    p.add_argument("--syndrome", required=True, help="file holding the syndrome (bit string or 'indices: ...')")
    p.add_argument("--trace", action="store_true", help="print the best-first pop trace")

    p = sub.add_parser("simulate", help="Monte Carlo run; one CSV row per sweep point")
    _add_common(p)
    _add_run(p)
    p.add_argument("--sweep-p", help="comma separated noise strengths")
    p.add_argument("--sweep-budget", help="comma separated BF-OSD budgets")

    p = sub.add_parser("compare", help="matched-shot comparison of two decoders")
    _add_common(p)
    _add_run(p)
    p.add_argument("--decoder-a", required=True, help="JSON decoder settings for A")
    p.add_argument("--decoder-b", required=True, help="JSON decoder settings for B")
    return parser


def _decoder_from_json(text: str, base: osd.DecoderConfig) -> osd.DecoderConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"decoder settings must be JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("decoder settings must be a JSON object")
    try:
        return osd.DecoderConfig(**{**base.params(), **doc})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


_CONFIG_ERRORS = (ConfigError, sim.ConfigError, model.CodeValidationError, model.FaultListError, FileNotFoundError)


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "decode":
            # the model file is the world view here; code/noise sources are irrelevant
            doc = _overrides(args)
            doc.pop("code", None)
            doc["noise"] = {"fault_list": {"path": args.model}}
            cfg = parse_run_config(doc)
            m = model.load_model(args.model)
            syndrome = read_syndrome(Path(args.syndrome).read_text(), m.n_detectors)
        else:
            cfg = load_config(args)
            if args.command == "compare":
                dec_a = _decoder_from_json(args.decoder_a, cfg.decoder)
                dec_b = _decoder_from_json(args.decoder_b, cfg.decoder)
    except _CONFIG_ERRORS as exc:
        print(f"bfosd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"bfosd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "build-model":
            _emit(cmd_build_model(cfg))
        elif args.command == "decode":
            _emit(cmd_decode(m, syndrome, cfg, trace=args.trace))
        elif args.command == "simulate":
            _emit(cmd_simulate(cfg))
        else:
            _emit(cmd_compare(cfg, dec_a, dec_b))
    except _CONFIG_ERRORS as exc:
        print(f"bfosd: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced verbatim, mapped to the runtime exit code
        print(f"bfosd: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
