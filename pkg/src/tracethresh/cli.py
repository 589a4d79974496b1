"""Command-line experiment runner.

Every command writes a CSV (header row first) and, when ``--out`` is given, a
JSON sidecar next to it holding the resolved configuration, seed and package
version.  Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, bp_sim, const_analysis, epi_sim, exp_analysis
from .dist import CONSTANT, EXPONENTIAL, GAMMA, ZERO, DistributionSpec
from .errors import DegenerateHistogram, InvalidConfig, NumericalFailure
from .params import INDEPENDENT, MUTUAL, ModelParams

COMMANDS = ("analyze-const", "analyze-exp", "lambda-crit", "lambda-star", "sim-bdp", "sim-epidemic", "sweep", "reproduce")
PRESETS = ("fig3", "fig4", "fig5", "fig6", "fig7a", "fig7b", "fig8", "table2")
METRICS = (
    "r0",
    "ru-const",
    "lambda-star-const",
    "p-ext-const",
    "y-star",
    "ru-exp",
    "lambda-star-exp",
    "lambda-crit",
    "p-ext-bdp",
    "mean-r-bdp",
    "p-minor",
)
AXES = ("lambda", "p", "pi_R", "pi_T", "N", "m", "latent_mean", "delay_mean", "infectious_mean")
DEFAULT_SEED = 0
DEFAULT_N = 100_000

E = DistributionSpec.exponential
E_MEAN = DistributionSpec.exponential_mean


@dataclass
class ExperimentConfig:
    command: str
    params: ModelParams | None = None
    preset: str | None = None
    seed: int = DEFAULT_SEED
    n: int | None = None
    out: str | None = None
    cutoff: int | None = None
    inf_threshold: int = bp_sim.DEFAULT_THRESHOLD
    case: str = exp_analysis.EXP_RU
    sweep_param: str | None = None
    sweep_grid: list[float] = field(default_factory=list)
    metric: str | None = None
    time_scale: float = 1.0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": None if self.params is None else self.params.to_dict(),
            "preset": self.preset,
            "seed": self.seed,
            "n": self.n,
            "out": self.out,
            "cutoff": self.cutoff,
            "inf_threshold": self.inf_threshold,
            "case": self.case,
            "sweep_param": self.sweep_param,
            "sweep_grid": list(self.sweep_grid),
            "metric": self.metric,
            "time_scale": self.time_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        params = d.pop("params", None)
        return cls(params=None if params is None else ModelParams.from_dict(params), **d)


@dataclass
class Table:
    header: list[str]
    rows: list[list]
    extra: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return v


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(_fmt(v))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# --- parameter helpers -------------------------------------------------------


def with_mean(spec: DistributionSpec, mean: float) -> DistributionSpec:
    """Same family as ``spec`` with a new mean."""
    if mean == 0:
        return DistributionSpec.zero()
    if spec.kind in (ZERO, CONSTANT):
        return DistributionSpec.constant(mean)
    if spec.kind == EXPONENTIAL:
        return E_MEAN(mean)
    return DistributionSpec.gamma(mean, spec.shape)


def set_axis(params: ModelParams, axis: str, value: float) -> ModelParams:
    if axis == "lambda":
        return params.replace(lam=float(value))
    if axis in ("p", "pi_R", "pi_T"):
        return params.replace(**{{"p": "p", "pi_R": "pi_r", "pi_T": "pi_t"}[axis]: float(value)})
    if axis in ("N", "m"):
        if float(value) != int(value):
            raise InvalidConfig(f"{axis} grid values must be integers, got {value}")
        return params.replace(**{axis: int(value)})
    if axis == "latent_mean":
        return params.replace(latent=with_mean(params.latent, value))
    if axis == "delay_mean":
        return params.replace(delay=with_mean(params.delay, value))
    if axis == "infectious_mean":
        if value <= 0:
            raise InvalidConfig(f"infectious_mean must be > 0, got {value}")
        return params.replace(infectious=with_mean(params.infectious, value))
    raise InvalidConfig(f"unknown sweep parameter {axis!r}; choose from {AXES}")


def normalize_time(params: ModelParams) -> tuple[ModelParams, float]:
    """Rescale time so that E[T_I] = 1; returns the new params and the factor used."""
    mean = params.infectious.mean()
    if mean <= 0:
        raise InvalidConfig("the infectious period must have a positive mean")
    if mean == 1.0:
        return params, 1.0
    f = 1.0 / mean
    return (
        params.replace(
            lam=params.lam * mean,
            infectious=params.infectious.scaled(f),
            latent=params.latent.scaled(f),
            delay=params.delay.scaled(f),
        ),
        f,
    )


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise InvalidConfig(f"grid step must be > 0, got {step}")
            k = int(math.floor((stop - start) / step + 1e-9))
            return [round(start + i * step, 12) for i in range(k + 1)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidConfig(f"cannot parse grid {text!r}") from None


# --- single-point metrics ----------------------------------------------------


def metric_value(cfg: ExperimentConfig, params: ModelParams, metric: str) -> float:
    n = cfg.n or DEFAULT_N
    if metric == "r0":
        return const_analysis.r0(params)
    if metric == "ru-const":
        return const_analysis.ru_const(params)
    if metric == "lambda-star-const":
        return const_analysis.lambda_star_const(params)
    if metric == "p-ext-const":
        return const_analysis.extinction_const(params).p_ext
    if metric == "y-star":
        return exp_analysis.y_star(params)
    if metric == "ru-exp":
        return exp_analysis.r_u_exp(params)
    if metric == "lambda-star-exp":
        return exp_analysis.lambda_star_exp(params)
    if metric == "lambda-crit":
        return exp_analysis.lambda_crit(params, cfg.case)
    if metric == "p-ext-bdp":
        return bp_sim.estimate_extinction(params, n, cfg.seed, cfg.inf_threshold).p_ext_hat
    if metric == "mean-r-bdp":
        return bp_sim.sample_r_set(params, n, cfg.seed, cfg.inf_threshold).mean
    if metric == "p-minor":
        return epi_sim.final_size_distribution(params, n, cfg.seed, cutoff=cfg.cutoff).p_minor
    raise InvalidConfig(f"unknown metric {metric!r}; choose from {METRICS}")


# --- commands ----------------------------------------------------------------


def _require_params(cfg: ExperimentConfig) -> ModelParams:
    if cfg.params is None:
        raise InvalidConfig("no parameters given; use --config, --preset or --lambda")
    return cfg.params


def cmd_analyze_const(cfg: ExperimentConfig) -> Table:
    p = _require_params(cfg)
    mm = const_analysis.mean_matrix(p)
    fp = const_analysis.fate_probs(p)
    ext = const_analysis.extinction_const(p)
    row = [
        p.lam,
        const_analysis.r0(p),
        const_analysis.ru_const(p),
        const_analysis.lambda_star_const(p),
        fp.p_N,
        fp.p_T,
        mm.m_UU,
        mm.m_UN,
        mm.m_NU,
        mm.m_NN,
        ext.q_U,
        ext.q_N,
        ext.p_ext,
    ]
    header = ["lambda", "r0", "r_u", "lambda_star", "p_N", "p_T", "m_UU", "m_UN", "m_NU", "m_NN", "q_U", "q_N", "p_ext"]
    return Table(header, [row])


def cmd_analyze_exp(cfg: ExperimentConfig) -> Table:
    p = _require_params(cfg)
    r = exp_analysis.analyze_exp(p)
    return Table(["lambda", "y_star", "r_u", "lambda_star", "finite"], [[p.lam, r.y_star, r.r_u, r.lambda_star, r.finite]])


def cmd_lambda_crit(cfg: ExperimentConfig) -> Table:
    p = _require_params(cfg)
    return Table(["case", "lambda_crit"], [[cfg.case, exp_analysis.lambda_crit(p, cfg.case)]])


def cmd_lambda_star(cfg: ExperimentConfig) -> Table:
    p = _require_params(cfg)
    if p.infectious.kind == EXPONENTIAL:
        return Table(["method", "lambda_star"], [["exp", exp_analysis.lambda_star_exp(p)]])
    return Table(["method", "lambda_star"], [["const", const_analysis.lambda_star_const(p)]])


def cmd_sim_bdp(cfg: ExperimentConfig) -> Table:
    p = _require_params(cfg)
    rs = bp_sim.sample_r_set(p, cfg.n or DEFAULT_N, cfg.seed, cfg.inf_threshold)
    est = bp_sim.extinction_from_samples(rs, p.m)
    rows = [[i, "" if v == bp_sim.INF_CODE else v, int(v == bp_sim.INF_CODE)] for i, v in enumerate(rs.samples.tolist())]
    extra = {"mean": rs.mean, "se": rs.se, "p_inf_hat": rs.p_inf_hat, "p_ext_hat": est.p_ext_hat, "p_ext_se": est.se}
    return Table(["replicate", "r_value", "is_inf"], rows, extra)


def cmd_sim_epidemic(cfg: ExperimentConfig) -> Table:
    p = _require_params(cfg)
    h = epi_sim.final_size_distribution(p, cfg.n or DEFAULT_N, cfg.seed, classify=False)
    extra = {"n": h.n, "noop_traces": h.noop_traces}
    try:
        h = h.with_cutoff(cfg.cutoff)
        extra.update(cutoff=h.cutoff, p_minor=h.p_minor, se=h.se)
    except DegenerateHistogram as exc:
        extra.update(cutoff=None, note=str(exc))
    rows = [[k, c] for k, c in enumerate(h.counts.tolist()) if c]
    return Table(["final_size", "count"], rows, extra)


def cmd_sweep(cfg: ExperimentConfig) -> Table:
    p = _require_params(cfg)
    if not cfg.sweep_param or not cfg.sweep_grid:
        raise InvalidConfig("sweep needs --param and --grid")
    if not cfg.metric:
        raise InvalidConfig(f"sweep needs --metric, one of {METRICS}")
    rows = [[v, metric_value(cfg, set_axis(p, cfg.sweep_param, v), cfg.metric)] for v in cfg.sweep_grid]
    return Table([cfg.sweep_param, cfg.metric.replace("-", "_")], rows)


# --- presets -----------------------------------------------------------------

SECTION6 = ModelParams(lam=2.0, p=0.5, pi_r=0.8, pi_t=0.8, infectious=E(1.0), latent=E(1.0), delay=E(1.0), m=1)
FIG3 = ModelParams(lam=1.0, p=1.0, pi_r=1.0, pi_t=0.0, infectious=E(1.0), delay=E(0.7))
LATENT_FAMILIES = (("exponential", E_MEAN), ("gamma2", lambda mu: DistributionSpec.gamma(mu, 2)),
                   ("gamma5", lambda mu: DistributionSpec.gamma(mu, 5)), ("constant", DistributionSpec.constant))


def _family(name: str) -> Callable[[float], DistributionSpec]:
    return dict(LATENT_FAMILIES)[name]


def _safe(fn, *args):
    try:
        return fn(*args)
    except (NumericalFailure, DegenerateHistogram):
        return math.nan


def preset_fig3(cfg: ExperimentConfig) -> Table:
    grid = parse_grid("0:2.1:0.005")
    rows = [[lam, y, r] for lam, y, _den, r in exp_analysis.lambda_trace(cfg.params or FIG3, grid)]
    return Table(["lambda", "y_star", "r_u"], rows, {"lambda_star": exp_analysis.lambda_star_exp(cfg.params or FIG3)})


def _final_size_preset(cfg: ExperimentConfig, infectious: DistributionSpec) -> Table:
    base = (cfg.params or SECTION6).replace(infectious=infectious) if cfg.params is None else cfg.params
    rows, extra = [], {}
    for N in (20, 50, 100, 200):
        h = epi_sim.final_size_distribution(base.replace(N=N), cfg.n or DEFAULT_N, cfg.seed, classify=False)
        rows += [[N, k, c] for k, c in enumerate(h.counts.tolist()) if c]
        try:
            extra[f"N={N}"] = {"cutoff": h.with_cutoff(cfg.cutoff).cutoff}
        except DegenerateHistogram:
            extra[f"N={N}"] = {"cutoff": None}
    return Table(["N", "final_size", "count"], rows, extra)


def preset_fig4(cfg):
    return _final_size_preset(cfg, E(1.0))


def preset_fig5(cfg):
    return _final_size_preset(cfg, DistributionSpec.constant(1.0))


def preset_fig6(cfg: ExperimentConfig) -> Table:
    n = cfg.n or DEFAULT_N
    rows = []
    for label, inf in (("exponential", E(1.0)), ("constant", DistributionSpec.constant(1.0))):
        base = SECTION6.replace(infectious=inf)
        asym = bp_sim.estimate_extinction(base, n, cfg.seed, cfg.inf_threshold).p_ext_hat
        for N in (20, 50, 100, 200, 400, 800, 1400, 2000):
            try:
                h = epi_sim.final_size_distribution(base.replace(N=N), n, cfg.seed, cutoff=cfg.cutoff)
                rows.append([label, N, h.p_minor, h.se, h.cutoff, asym])
            except DegenerateHistogram:
                rows.append([label, N, math.nan, math.nan, "", asym])
    return Table(["infectious", "N", "p_hat", "se", "cutoff", "p_ext_branching"], rows)


def preset_fig7a(cfg: ExperimentConfig) -> Table:
    rows = []
    means = parse_grid("0:2:0.1")
    for xi in (0.5, 2.0):
        for p in (0.5, 1.0):
            base = ModelParams(lam=1.0, p=p, pi_r=0.8, pi_t=0.8, infectious=E(1.0), delay=E(xi))
            for fam, make in LATENT_FAMILIES:
                for mu in means:
                    q = base.replace(latent=make(mu) if mu > 0 else DistributionSpec.zero())
                    rows.append([xi, p, fam, mu, _safe(exp_analysis.lambda_crit, q, exp_analysis.EXP_RU)])
    return Table(["xi", "p", "latent_law", "latent_mean", "lambda_crit"], rows)


def preset_fig7b(cfg: ExperimentConfig) -> Table:
    rows = []
    means = parse_grid("0:3:0.1")
    for mu in (0.5, 2.0):
        for p in (0.5, 1.0):
            base = ModelParams(lam=1.0, p=p, pi_r=1.0, pi_t=0.0, infectious=DistributionSpec.constant(1.0), latent=E(mu))
            for fam, make in LATENT_FAMILIES:
                for d in means:
                    q = base.replace(delay=make(d) if d > 0 else DistributionSpec.zero())
                    rows.append([mu, p, fam, d, _safe(exp_analysis.lambda_crit, q, exp_analysis.CONST_RU)])
    return Table(["mu", "p", "delay_law", "delay_mean", "lambda_crit"], rows)


FIG8_DISEASES = (("influenza", 0.10), ("smallpox", 0.58))
FIG8_DELAY_MEANS = (0.25, 0.5, 1.0, 2.0)


def fig8_params(latent_mean: float, delay_mean: float, p: float) -> ModelParams:
    return ModelParams(lam=1.0, p=p, pi_r=0.8, pi_t=0.8, infectious=E(1.0), latent=E_MEAN(latent_mean), delay=E_MEAN(delay_mean))


def preset_fig8(cfg: ExperimentConfig) -> Table:
    rows = []
    for name, mu in FIG8_DISEASES:
        for d in FIG8_DELAY_MEANS:
            for p in parse_grid("0:1:0.05"):
                rows.append([name, d, p, _safe(exp_analysis.lambda_crit, fig8_params(mu, d, p), exp_analysis.EXP_RU)])
    return Table(["disease", "delay_mean", "p", "lambda_crit"], rows)


TABLE2_BLOCKS = (("lam1.5_TLexp1", 1.5, E(1.0)), ("lam1.5_TL0", 1.5, DistributionSpec.zero()), ("lam2.5_TL0", 2.5, DistributionSpec.zero()))
TABLE2_DELAY_MEANS = tuple(round(0.5 * k, 1) for k in range(11))


def table2_params(lam: float, latent: DistributionSpec, delay_mean: float, coupling: str) -> ModelParams:
    return ModelParams(
        lam=lam, p=1.0, pi_r=0.8, pi_t=0.8, infectious=E(1.0), latent=latent, delay=E_MEAN(delay_mean), delay_coupling=coupling
    )


def preset_table2(cfg: ExperimentConfig) -> Table:
    n = cfg.n or DEFAULT_N
    header = ["delay_mean"] + [f"{name}_{c}" for name, _l, _t in TABLE2_BLOCKS for c in (INDEPENDENT, MUTUAL)]
    rows = []
    for d in TABLE2_DELAY_MEANS:
        row = [d]
        for _name, lam, lat in TABLE2_BLOCKS:
            for c in (INDEPENDENT, MUTUAL):
                row.append(bp_sim.table2_cell(table2_params(lam, lat, d, c), n, cfg.seed, cfg.inf_threshold))
        rows.append(row)
    return Table(header, rows)


PRESET_RUNNERS = {
    "fig3": preset_fig3,
    "fig4": preset_fig4,
    "fig5": preset_fig5,
    "fig6": preset_fig6,
    "fig7a": preset_fig7a,
    "fig7b": preset_fig7b,
    "fig8": preset_fig8,
    "table2": preset_table2,
}


def cmd_reproduce(cfg: ExperimentConfig) -> Table:
    if cfg.preset not in PRESET_RUNNERS:
        raise InvalidConfig(f"reproduce needs --preset, one of {PRESETS}")
    return PRESET_RUNNERS[cfg.preset](cfg)


RUNNERS = {
    "analyze-const": cmd_analyze_const,
    "analyze-exp": cmd_analyze_exp,
    "lambda-crit": cmd_lambda_crit,
    "lambda-star": cmd_lambda_star,
    "sim-bdp": cmd_sim_bdp,
    "sim-epidemic": cmd_sim_epidemic,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
}

# Parameters each preset fixes when used outside ``reproduce``.
PRESET_PARAMS = {
    "fig3": FIG3,
    "fig4": SECTION6.replace(N=200),
    "fig5": SECTION6.replace(infectious=DistributionSpec.constant(1.0), N=200),
    "fig6": SECTION6.replace(N=1400),
    "fig7a": ModelParams(lam=1.0, p=1.0, pi_r=0.8, pi_t=0.8, infectious=E(1.0), latent=E(1.0), delay=E(0.5)),
    "fig7b": ModelParams(lam=1.0, p=1.0, pi_r=1.0, pi_t=0.0, infectious=DistributionSpec.constant(1.0), latent=E(0.5), delay=E(1.0)),
    "fig8": fig8_params(0.58, 1.0, 0.5),
    "table2": table2_params(2.5, DistributionSpec.zero(), 1.0, INDEPENDENT),
}


# --- argument handling -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tracethresh", description="Contact-tracing epidemic thresholds and simulations.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with model parameters")
        sp.add_argument("--preset", choices=PRESETS)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--n", type=int, help=f"replicates (default {DEFAULT_N})")
        sp.add_argument("--out", help="CSV path; a .json sidecar is written next to it")
        sp.add_argument("--cutoff", type=int, help="minor/major final-size boundary")
        sp.add_argument("--coupling", choices=(INDEPENDENT, MUTUAL))
        sp.add_argument("--inf-threshold", type=int, default=bp_sim.DEFAULT_THRESHOLD)
        sp.add_argument("--case", choices=exp_analysis.CASES, default=exp_analysis.EXP_RU)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--p", type=float)
        sp.add_argument("--pi-r", type=float)
        sp.add_argument("--pi-t", type=float)
        sp.add_argument("--N", type=int)
        sp.add_argument("--m", type=int)
        if name == "sweep":
            sp.add_argument("--param", choices=AXES)
            sp.add_argument("--grid", help="start:stop:step or comma list")
            sp.add_argument("--metric", choices=METRICS)
    return ap


def resolve(ns: argparse.Namespace) -> ExperimentConfig:
    params = None
    if ns.preset:
        params = PRESET_PARAMS[ns.preset]
    if ns.config:
        try:
            raw = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read --config {ns.config}: {exc}") from None
        if isinstance(raw, dict) and "command" in raw and "params" in raw:
            raw = raw["params"]
        params = ModelParams.from_dict(raw)
    overrides = {}
    for flag, key in (("lam", "lam"), ("p", "p"), ("pi_r", "pi_r"), ("pi_t", "pi_t"), ("N", "N"), ("m", "m"), ("coupling", "delay_coupling")):
        v = getattr(ns, flag)
        if v is not None:
            overrides[key] = v
    if overrides:
        if params is None:
            if "lam" not in overrides:
                raise InvalidConfig("missing parameter 'lambda'")
            params = ModelParams(**overrides)
        else:
            params = params.replace(**overrides)
    scale = 1.0
    if params is not None:
        params, scale = normalize_time(params)
    if ns.n is not None and ns.n < 1:
        raise InvalidConfig(f"--n must be >= 1, got {ns.n}")
    if ns.inf_threshold < 1:
        raise InvalidConfig(f"--inf-threshold must be >= 1, got {ns.inf_threshold}")
    cfg = ExperimentConfig(
        command=ns.command,
        params=params,
        preset=ns.preset,
        seed=ns.seed,
        n=ns.n,
        out=ns.out,
        cutoff=ns.cutoff,
        inf_threshold=ns.inf_threshold,
        case=ns.case,
        time_scale=scale,
    )
    if ns.command == "sweep":
        cfg.sweep_param = ns.param
        cfg.sweep_grid = parse_grid(ns.grid) if ns.grid else []
        cfg.metric = ns.metric
    if ns.command == "reproduce" and ns.preset != "fig3" and params is not None and not (ns.config or overrides):
        # presets define their own parameter grids
        cfg.params = None
    if ns.out:
        out = Path(ns.out)
        if out.parent and not out.parent.exists():
            raise InvalidConfig(f"output directory {out.parent} does not exist")
    return cfg


def sidecar_path(out: str) -> Path:
    return Path(out).with_suffix(".json")


def run(cfg: ExperimentConfig, stdout=None) -> Table:
    table = RUNNERS[cfg.command](cfg)
    text = table.to_csv()
    if cfg.out:
        Path(cfg.out).write_text(text)
        side = {"config": cfg.to_dict(), "version": __version__, "results": table.extra}
        sidecar_path(cfg.out).write_text(json.dumps(_json_safe(side), indent=2, sort_keys=True) + "\n")
    else:
        (stdout or sys.stdout).write(text)
    return table


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        run(resolve(ns))
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, DegenerateHistogram) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
