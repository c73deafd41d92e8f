"""Experiment driver.

    pbitsim <kind> --config <path> [--out <dir>] [--threads N] [--seed S]

``kind`` is one of sample, anneal, train, maxcut, characterize. The output
directory defaults to ``$PBITSIM_OUT`` and then ``./pbitsim-out``. Exit
codes: 0 success, 2 configuration error, 3 runtime error.

Result files are a pure function of the validated config; wall time,
thread count and library versions live only in ``manifest.json``.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import platform
import sys
import time
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .anneal import AnnealSchedule, anneal, sk_instance
from .characterize import bias_sweep_characterize, default_codes
from .hardware import HardwareProfile
from .learning import CdConfig, TargetDistribution, evaluate, train
from .model import IsingModel, load_model, model_to_json
from .problems import (EmbeddingError, OracleBudgetError, code_cut_identity, cut_value,
                       gate_problem, gate_targets, ground_state, max_cut, maxcut_encode,
                       random_chimera_graph, read_graph)
from .sampler import SamplerConfig, pattern_strings, run_chain
from .topology import ConfigurationError, build_chimera

KINDS = ("sample", "anneal", "train", "maxcut", "characterize")
ENV_OUT = "PBITSIM_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TopologySpec(_Strict):
    rows: int = Field(7, ge=1)
    cols: int = Field(8, ge=1)
    shore_size: int = Field(4, ge=1)
    disabled_cells: List[Tuple[int, int]] = [(0, 0)]


class ModelSpec(_Strict):
    file: Optional[str] = None
    generator: Optional[Literal["zero", "sk", "gate"]] = None
    distribution: Literal["pm1", "gaussian"] = "pm1"
    sigma: float = Field(0.3, gt=0)
    seed: int = 0
    gate: Optional[str] = None
    weight_scale: float = Field(1.0, gt=0)
    bias_scale: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.file is None) == (self.generator is None):
            raise ValueError("give exactly one of 'file' or 'generator'")
        if self.generator == "gate" and self.gate is None:
            raise ValueError("generator 'gate' needs a 'gate' name")
        return self


class GraphSpec(_Strict):
    file: Optional[str] = None
    generator: Optional[Literal["random"]] = None
    seed: int = 0
    edge_prob: float = Field(0.7, gt=0, le=1)
    weight_min: float = 0.1
    weight_max: float = 1.0

    @model_validator(mode="after")
    def _one_source(self):
        if (self.file is None) == (self.generator is None):
            raise ValueError("give exactly one of 'file' or 'generator'")
        return self


class SamplerSpec(_Strict):
    beta: float = Field(1.0, gt=0)
    schedule: Literal["sequential", "random_permutation", "chromatic"] = "sequential"
    sweeps: int = Field(10_000, ge=1)
    burn_in: int = Field(0, ge=0)
    chains: int = Field(1, ge=1)
    designated: Optional[List[int]] = None


class HardwareSpec(_Strict):
    rng: Literal["ideal", "lfsr"] = "ideal"
    dac_bits: int = Field(8, ge=1, le=8)
    gain_sigma: float = Field(0.0, ge=0)
    offset_sigma: float = Field(0.0, ge=0)
    mismatch_seed: int = 0


class ScheduleSpec(_Strict):
    beta_start: float = Field(0.1, gt=0)
    beta_end: float = Field(3.0, gt=0)
    sweeps: int = Field(1000, ge=1)
    shape: Literal["linear", "geometric"] = "geometric"


class AnnealSpec(_Strict):
    restarts: int = Field(10, ge=1)
    oracle: bool = False


class CdSpec(_Strict):
    learning_rate: float = Field(0.05, ge=0)
    cd_k: int = Field(5, ge=1)
    steps: int = Field(1500, ge=1)
    batch: int = Field(32, ge=1)
    beta_train: float = Field(1.0, gt=0)
    persistent: bool = False
    final_lr_fraction: float = Field(1.0, ge=0, le=1)
    eval_sweeps: int = Field(1000, ge=2)
    eval_burn_in: int = Field(50, ge=0)
    final_eval_sweeps: int = Field(100_000, ge=1)


class TargetSpec(_Strict):
    gate: Optional[str] = None
    nodes: Optional[List[int]] = None
    file: Optional[str] = None


class CharacterizeSpec(_Strict):
    nodes: Optional[List[int]] = None
    codes: Optional[List[int]] = None
    sweeps_per_code: int = Field(10_000, ge=1)
    bias_scale: float = Field(2.0, gt=0)


class ExperimentConfig(_Strict):
    kind: Optional[Literal["sample", "anneal", "train", "maxcut", "characterize"]] = None
    seed: int = 0
    topology: TopologySpec = TopologySpec()
    model: Optional[ModelSpec] = None
    graph: Optional[GraphSpec] = None
    sampler: SamplerSpec = SamplerSpec()
    hardware: HardwareSpec = HardwareSpec()
    schedule: ScheduleSpec = ScheduleSpec()
    anneal: AnnealSpec = AnnealSpec()
    cd: CdSpec = CdSpec()
    target: Optional[TargetSpec] = None
    characterize: CharacterizeSpec = CharacterizeSpec()
    output_dir: Optional[str] = None


class ConfigError(Exception):
    pass


# -- config loading -----------------------------------------------------------

def _line_of(text: str, key) -> Optional[int]:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def load_config(path, seed: Optional[int] = None) -> ExperimentConfig:
    """Parse and validate a config file; ``seed`` overrides the master seed."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if seed is not None and isinstance(raw, dict):
        raw["seed"] = seed
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = ".".join(str(x) for x in err["loc"]) or "<root>"
            keys = [x for x in err["loc"] if isinstance(x, str)]
            line = _line_of(text, keys[-1]) if keys else None
            where = f"{path}:{line}" if line else str(path)
            lines.append(f"{where}: field '{loc}': {err['msg']}")
        raise ConfigError("\n".join(lines)) from None


def config_hash(cfg: ExperimentConfig) -> str:
    doc = cfg.model_dump(mode="json", exclude={"output_dir"})
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


# -- builders -----------------------------------------------------------------

def _topology(cfg):
    t = cfg.topology
    return build_chimera(t.rows, t.cols, t.shore_size, t.disabled_cells)


def _resolve(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


def _model(cfg, base: Path) -> IsingModel:
    spec = cfg.model
    if spec is None:
        raise ConfigError("field 'model': required for this experiment kind")
    if spec.file is not None:
        path = _resolve(base, spec.file)
        try:
            return load_model(path)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"field 'model.file': cannot load {path}: {exc}") from None
    topo = _topology(cfg)
    if spec.generator == "zero":
        return IsingModel(topo, weight_scale=spec.weight_scale, bias_scale=spec.bias_scale)
    if spec.generator == "sk":
        return sk_instance(topo, spec.distribution, spec.seed, spec.sigma, spec.weight_scale)
    model, _ = gate_problem(spec.gate, spec.weight_scale, spec.bias_scale)
    return model


def _hardware(cfg) -> HardwareProfile:
    return HardwareProfile(**cfg.hardware.model_dump())


def _schedule(cfg) -> AnnealSchedule:
    return AnnealSchedule(**cfg.schedule.model_dump())


# -- writers ------------------------------------------------------------------

class _Outputs:
    """Collects result files in memory; nothing touches disk until commit."""

    def __init__(self, chash: str):
        self.chash = chash
        self.files = {}

    def csv(self, name, header, rows, meta=None):
        buf = io.StringIO(newline="")
        buf.write(f"# config_hash={self.chash}\n")
        for k, v in (meta or {}).items():
            buf.write(f"# {k}={v}\n")
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(x) for x in row) + "\n")
        self.files[name] = buf.getvalue()

    def json(self, name, doc):
        doc = {"config_hash": self.chash, **doc}
        self.files[name] = json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def commit(self, out: Path):
        out.mkdir(parents=True, exist_ok=True)
        for name, body in self.files.items():
            with open(out / name, "w", newline="\n") as f:
                f.write(body)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _floats(a):
    return [float(x) for x in np.asarray(a).ravel()]


# -- experiments --------------------------------------------------------------

def _run_sample(cfg, base, out: _Outputs, threads):
    model = _model(cfg, base)
    hw = _hardware(cfg)
    s = cfg.sampler
    if s.burn_in >= s.sweeps:
        raise ConfigError("field 'sampler.burn_in': must be smaller than sampler.sweeps")
    designated = s.designated if s.designated is not None else []
    children = np.random.SeedSequence(cfg.seed).spawn(s.chains)

    def one(c):
        return run_chain(model, SamplerConfig(s.beta, s.schedule, s.sweeps, s.burn_in, children[c]),
                         hw, designated=designated)

    runs = _map(one, range(s.chains), threads)
    meta = {"seed": cfg.seed, "schedule": s.schedule, "beta": s.beta}
    out.csv("energy_trace.csv", ["chain", "sweep", "energy"],
            [(c, t, e) for c, r in enumerate(runs) for t, e in enumerate(r.energy_trace)], meta)
    hist = np.sum([r.histogram for r in runs], axis=0)
    total = sum(r.samples for r in runs)
    out.json("chain_stats.json", {
        **meta,
        "sweeps": s.sweeps, "burn_in": s.burn_in, "chains": s.chains,
        "designated": list(designated),
        "histogram": dict(zip(pattern_strings(len(designated)), map(int, hist))),
        "samples": total,
        "mean_spin": _floats(np.mean([r.mean_spin for r in runs], axis=0)),
        "pair_correlation": _floats(np.mean([r.pair_correlation for r in runs], axis=0)),
        "best_energy": min(r.best_energy for r in runs),
    })


def _anneal_outputs(cfg, model, res, out: _Outputs, extra=None):
    sch = cfg.schedule
    meta = {"seed": cfg.seed, "schedule": cfg.sampler.schedule,
            "beta": f"{sch.shape}:{sch.beta_start}->{sch.beta_end}"}
    rows = [(r, t, e, m)
            for r in range(res.energy_traces.shape[0])
            for t, (e, m) in enumerate(zip(res.energy_traces[r], res.min_traces[r]))]
    out.csv("energy_trace.csv", ["restart", "sweep", "energy", "min_energy"], rows, meta)
    doc = {"seed": cfg.seed, "schedule": sch.model_dump(), "restarts": cfg.anneal.restarts,
           "best_energy": res.best_energy, "best_restart": res.best_restart,
           "best_state": [int(x) for x in res.best_state]}
    if cfg.model is not None and cfg.model.generator is not None:
        doc["instance_seed"] = cfg.model.seed
    doc.update(extra or {})
    out.json("best_state.json", doc)


def _run_anneal(cfg, base, out, threads):
    model = _model(cfg, base)
    res = anneal(model, _schedule(cfg), SamplerConfig(schedule=cfg.sampler.schedule, seed=cfg.seed),
                 _hardware(cfg), cfg.anneal.restarts, threads)
    _anneal_outputs(cfg, model, res, out)
    if cfg.anneal.oracle:
        e0, states = ground_state(model)
        out.json("oracle.json", {"ground_energy": e0, "ground_state_count": int(len(states))})


def _run_maxcut(cfg, base, out, threads):
    topo = _topology(cfg)
    g = cfg.graph
    if g is None:
        raise ConfigError("field 'graph': required for maxcut")
    if g.file is not None:
        graph = read_graph(_resolve(base, g.file))
    else:
        graph = random_chimera_graph(topo, g.seed, g.edge_prob, (g.weight_min, g.weight_max))
    model = maxcut_encode(graph, topo)
    res = anneal(model, _schedule(cfg), SamplerConfig(schedule=cfg.sampler.schedule, seed=cfg.seed),
                 _hardware(cfg), cfg.anneal.restarts, threads)
    e_codes, w_codes, cut2 = code_cut_identity(model, res.best_state)
    extra = {"cut": cut_value(graph, res.best_state), "graph_edges": len(graph),
             "identity_holds": e_codes == w_codes - cut2}
    _anneal_outputs(cfg, model, res, out, extra)
    if cfg.anneal.oracle:
        best, assignments = max_cut(graph)
        out.json("oracle.json", {"max_cut": best, "optimal_assignments": len(assignments)})


def _target(cfg, base, model_nodes_default):
    t = cfg.target
    if t is None:
        raise ConfigError("field 'target': required for train")
    if t.file is not None:
        with open(_resolve(base, t.file)) as f:
            return TargetDistribution.from_json(json.load(f))
    if t.gate is None:
        raise ConfigError("field 'target': give 'gate' or 'file'")
    return gate_targets(t.gate, t.nodes if t.nodes is not None else model_nodes_default)


def _run_train(cfg, base, out, threads):
    spec = cfg.model
    if spec is not None and spec.generator == "gate":
        model, default_target = gate_problem(spec.gate, spec.weight_scale, spec.bias_scale)
        target = _target(cfg, base, default_target.nodes) if cfg.target else default_target
    else:
        model = _model(cfg, base)
        target = _target(cfg, base, None)
    hw = _hardware(cfg)
    c = cfg.cd
    cd = CdConfig(c.learning_rate, c.cd_k, c.steps, c.batch, c.beta_train, cfg.seed, c.persistent,
                  c.final_lr_fraction, c.eval_sweeps, c.eval_burn_in)
    trained, trace = train(model, target, cd, hw)
    kl, mass, dist = evaluate(trained, target, c.beta_train, hw, c.final_eval_sweeps,
                              min(1000, c.final_eval_sweeps - 1), seed=cfg.seed)
    out.csv("training_trace.csv", ["step", "kl", "mean_abs_correlation_error"], trace.rows(),
            {"seed": cfg.seed, "beta": c.beta_train})
    out.json("model.json", model_to_json(trained))
    out.json("target.json", target.to_json())
    out.json("evaluation.json", {"kl": kl, "valid_mass": mass, "distribution": _floats(dist),
                                 "sweeps": c.final_eval_sweeps, "seed": cfg.seed})


def _run_characterize(cfg, base, out, threads):
    ch = cfg.characterize
    s = cfg.sampler
    topo = _topology(cfg)
    model = IsingModel(topo, bias_scale=ch.bias_scale)
    nodes = ch.nodes if ch.nodes is not None else list(range(topo.num_nodes))
    codes = ch.codes if ch.codes is not None else default_codes().tolist()
    if any(abs(c) > 127 for c in codes):
        raise ConfigError("field 'characterize.codes': codes must lie in [-127, 127]")
    res = bias_sweep_characterize(model, nodes, codes,
                                  SamplerConfig(s.beta, s.schedule, ch.sweeps_per_code, 0, cfg.seed),
                                  _hardware(cfg), threads)
    rows = [(int(n), int(c), res.mean_spin[i, j])
            for j, n in enumerate(res.nodes) for i, c in enumerate(res.codes)]
    out.csv("characterization.csv", ["node", "bias_code", "mean_spin"], rows,
            {"seed": cfg.seed, "beta": s.beta})
    gain = res.gain()[res.fit_ok]
    out.json("fit.json", {
        "beta": s.beta,
        "nodes": [
            {"node": int(n), "fit_ok": bool(ok),
             "beta_eff": float(b) if ok else None, "offset": float(o) if ok else None}
            for n, ok, b, o in zip(res.nodes, res.fit_ok, res.beta_eff, res.offset)],
        "summary": {
            "fitted": int(res.fit_ok.sum()), "failed": int((~res.fit_ok).sum()),
            "gain_mean": float(gain.mean()) if gain.size else None,
            "gain_std": float(gain.std(ddof=1)) if gain.size > 1 else None,
            "max_abs_gain_error": float(np.abs(gain - 1).max()) if gain.size else None,
        },
    })


def _map(fn, items, threads):
    items = list(items)
    if threads > 1 and len(items) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


_RUNNERS = {
    "sample": _run_sample,
    "anneal": _run_anneal,
    "train": _run_train,
    "maxcut": _run_maxcut,
    "characterize": _run_characterize,
}


def _default_out() -> Path:
    return Path(os.environ.get(ENV_OUT, "pbitsim-out"))


def run(config_path, kind: Optional[str] = None, out: Optional[str] = None,
        threads: int = 1, seed: Optional[int] = None) -> Path:
    """Run one experiment and write its artifacts. Returns the output dir.

    Raises :class:`ConfigError` (or a module-level configuration error) on
    invalid input; no files are written in that case.
    """
    t0 = time.perf_counter()
    cfg = load_config(config_path, seed)
    kind = kind or cfg.kind
    if kind is None:
        raise ConfigError("field 'kind': not given on the command line or in the config")
    if cfg.kind is not None and cfg.kind != kind:
        raise ConfigError(f"field 'kind': config says {cfg.kind!r} but {kind!r} was requested")
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    base = Path(config_path).resolve().parent
    outdir = Path(out) if out is not None else (
        _resolve(base, cfg.output_dir) if cfg.output_dir else _default_out())
    chash = config_hash(cfg)
    outputs = _Outputs(chash)
    _RUNNERS[kind](cfg, base, outputs, threads)
    manifest = {
        "config_hash": chash,
        "kind": kind,
        "config": cfg.model_dump(mode="json"),
        "seed": cfg.seed,
        "threads": threads,
        "wall_time_s": time.perf_counter() - t0,
        "files": sorted(outputs.files),
        "versions": {"pbitsim": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
    }
    outputs.files["manifest.json"] = json.dumps(manifest, indent=1, sort_keys=True) + "\n"
    outputs.commit(outdir)
    return outdir


def characterize(config_path, **kw) -> Path:
    """Bias-sweep mismatch report; shorthand for ``run(path, "characterize")``."""
    return run(config_path, "characterize", **kw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pbitsim", description="p-bit chip emulator experiments")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--config", required=True, help="experiment JSON file")
    parser.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./pbitsim-out)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    parser.add_argument("--seed", type=int, help="override the config master seed")
    args = parser.parse_args(argv)
    try:
        outdir = run(args.config, args.kind, args.out, args.threads, args.seed)
    except (ConfigError, ConfigurationError, EmbeddingError, OracleBudgetError) as exc:
        print(f"pbitsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        print(f"pbitsim: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(outdir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
