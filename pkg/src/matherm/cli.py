"""Command-line front end.

    matherm tables build|show
    matherm eval zonal|hermite|laguerre
    matherm coeff det|det-sigma|mc|radial
    matherm variance-expansion
    matherm geometry intrinsic|mixed|steiner
    matherm mehler apply|covariance
    matherm arw freq|mean|variance|clt|diagnostics
    matherm suite acceptance

Settings come from an optional JSON file (``--config``); flags given on the
command line override it.  Exit status is 0 on success, 2 on invalid input
and 1 on internal errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__, arw
from .chaos import (
    coefficient_mc,
    det_coefficient,
    det_coefficient_sigma,
    det_expansion,
    radial_coefficient_integral,
    sqrt_det,
    variance_terms,
)
from .geometry import EllipsoidSpec, intrinsic_volume, mixed_volume_ellipsoid_ball, steiner_check
from .matpoly import MatPolyContext, hermite_eval, hermite_eval_sigma, laguerre_eval
from .mehler import (
    CorrelationSpec,
    MehlerSpec,
    correlated_hermite_covariance,
    eigenvalue_ratio,
    hermite_functional,
    mehler_apply,
    random_correlation,
)
from .partitions import Partition, parse_partition
from .sampling import RngStream
from .zonal import CACHE_VERSION, cache_path, get_table, load_or_build_table, zonal_eval

COMMANDS = {
    "tables": ("build", "show"),
    "eval": ("zonal", "hermite", "laguerre"),
    "coeff": ("det", "det-sigma", "mc", "radial"),
    "variance-expansion": (),
    "geometry": ("intrinsic", "mixed", "steiner"),
    "mehler": ("apply", "covariance"),
    "arw": ("freq", "mean", "variance", "clt", "diagnostics"),
    "suite": ("acceptance",),
}

FUNCTIONALS = {
    "sqrt-det": sqrt_det,
    "trace": lambda eigs: np.sum(eigs, axis=-1),
}


class UsageError(ValueError):
    """Invalid input; reported with exit status 2."""


@dataclass
class RunConfig:
    command: str = ""
    ell: int | None = None
    n: int | None = None
    kappa: str | None = None
    kappa2: str | None = None
    sigma: str | None = None
    matrix: str | None = None
    eigs: str | None = None
    gamma: float | None = None
    t: float | None = None
    a: str | None = None
    rho: float | None = None
    K: int | None = None
    degree: int | None = None
    route: str | None = None
    function: str | None = None
    eps: float | None = None
    criteria: str | None = None
    samples: int | None = None
    replicates: int | None = None
    grid: int | None = None
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str | None = None

    def validate(self):
        for name in ("ell", "n", "K", "degree", "samples", "replicates", "grid", "workers"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise UsageError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.format not in (None, "csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        for name in ("kappa", "kappa2"):
            if getattr(self, name) is not None:
                try:
                    parse_partition(str(getattr(self, name)))
                except ValueError as exc:
                    raise UsageError(f"{name}: {exc}") from None
        return self

    def need(self, *names):
        missing = [f"--{nm}" for nm in names if getattr(self, nm) is None]
        if missing:
            raise UsageError(f"{self.command} requires {', '.join(missing)}")

    @property
    def partition(self) -> Partition:
        self.need("kappa")
        return parse_partition(str(self.kappa))

    def resolved(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


def load_config(path) -> dict:
    """Read a JSON object of settings; unknown keys and unreadable files are errors."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    if not text.strip():
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    return data


def parse_matrix(text: str) -> np.ndarray:
    """Inline ``"1,0;0,2"`` (rows split by ';') or a path to a .npy or whitespace text file."""
    p = Path(text)
    if p.suffix in (".npy", ".txt", ".csv") or p.exists():
        if not p.exists():
            raise UsageError(f"matrix file {text} not found")
        return np.atleast_2d(np.load(p) if p.suffix == ".npy" else np.loadtxt(p, delimiter="," if p.suffix == ".csv" else None))
    try:
        rows = [[float(x) for x in r.split(",")] for r in text.strip().split(";")]
        return np.array(rows, dtype=float)
    except ValueError:
        raise UsageError(f"cannot parse matrix {text!r}; use rows like '1,0;0,2'") from None


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in str(text).split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"cannot parse list of numbers {text!r}") from None


# ---------------------------------------------------------------- output


def metadata(cfg: RunConfig) -> dict:
    return {"version": __version__, "config": cfg.resolved(), "seed": cfg.seed, "table_cache_version": CACHE_VERSION}


def _jsonable(v):
    if isinstance(v, Partition):
        return str(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def emit(cfg: RunConfig, rows: list[dict], summary: dict | None = None, scalar=None):
    """Write rows as CSV (metadata in '#' lines) or JSON; a bare scalar when no format or file is given."""
    rows = [{k: _jsonable(v) for k, v in r.items()} for r in rows]
    fmt = cfg.format
    if fmt is None and cfg.out is None and scalar is not None:
        text = repr(float(scalar)) + "\n"
    elif fmt == "csv" or (fmt is None and summary is None):
        buf = io.StringIO()
        buf.write(f"# metadata: {json.dumps(metadata(cfg), default=_jsonable)}\n")
        if summary is not None:
            buf.write(f"# summary: {json.dumps(summary, default=_jsonable)}\n")
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        text = buf.getvalue()
    else:
        payload = {"metadata": metadata(cfg)}
        if summary is not None:
            payload["summary"] = summary
        payload["results"] = rows
        text = json.dumps(payload, indent=2, default=_jsonable) + "\n"
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _rng(cfg: RunConfig) -> RngStream:
    return RngStream(cfg.seed)


def _ctx(cfg: RunConfig, kappa: Partition) -> MatPolyContext:
    cfg.need("ell", "n")
    return MatPolyContext(cfg.ell, cfg.n, get_table(max(kappa.weight, 4)))


def cmd_tables_build(cfg):
    degree = cfg.degree or 8
    table = load_or_build_table(degree)
    path = cache_path(degree)
    emit(cfg, [{"max_degree": table.max_degree, "partitions": len(table.partitions()), "path": str(path)}])


def cmd_tables_show(cfg):
    degree = cfg.degree or (cfg.partition.weight if cfg.kappa is not None else 3)
    table = get_table(degree)
    kappas = [cfg.partition] if cfg.kappa is not None else [k for k in table.partitions() if k.weight <= degree]
    rows = []
    for kappa in kappas:
        for lam, c in table.zonal(kappa).items():
            rows.append({"kappa": str(kappa), "basis": "monomial", "index": str(lam), "coefficient": str(c)})
        for nu, c in table.zonal_powersum(kappa).items():
            rows.append({"kappa": str(kappa), "basis": "powersum", "index": str(nu), "coefficient": str(c)})
    emit(cfg, rows)


def cmd_eval_zonal(cfg):
    cfg.need("eigs")
    kappa = cfg.partition
    value = float(zonal_eval(kappa, parse_vector(cfg.eigs), get_table(max(kappa.weight, 4))))
    emit(cfg, [{"kappa": kappa, "value": value}], scalar=value)


def cmd_eval_hermite(cfg):
    cfg.need("matrix")
    kappa = cfg.partition
    ctx = _ctx(cfg, kappa)
    X = parse_matrix(cfg.matrix)
    if cfg.sigma is not None:
        value = float(hermite_eval_sigma(kappa, X, parse_matrix(cfg.sigma), ctx))
    else:
        value = float(hermite_eval(kappa, X, ctx))
    emit(cfg, [{"kappa": kappa, "value": value}], scalar=value)


def cmd_eval_laguerre(cfg):
    cfg.need("eigs", "gamma")
    kappa = cfg.partition
    eigs = parse_vector(cfg.eigs)
    ctx = MatPolyContext(len(eigs), max(len(eigs), cfg.n or len(eigs)), get_table(max(kappa.weight, 4)))
    value = float(laguerre_eval(kappa, cfg.gamma, eigs, ctx))
    emit(cfg, [{"kappa": kappa, "gamma": cfg.gamma, "value": value}], scalar=value)


def cmd_coeff_det(cfg):
    cfg.need("ell", "n")
    kappa = cfg.partition
    value = det_coefficient(kappa, cfg.ell, cfg.n, get_table(max(kappa.weight, 4)))
    emit(cfg, [{"partition": kappa, "value": value, "route": "closed_form", "std_error": ""}], scalar=value)


def _record_rows(rec):
    return [{"partition": rec.partition, "value": rec.value, "route": rec.route, "std_error": rec.std_error}]


def cmd_coeff_det_sigma(cfg):
    cfg.need("ell", "n", "sigma")
    rec = det_coefficient_sigma(cfg.partition, cfg.ell, cfg.n, parse_matrix(cfg.sigma), cfg.samples or 100_000,
                                _rng(cfg), workers=cfg.workers)
    emit(cfg, _record_rows(rec))


def _functional(cfg):
    name = cfg.function or "sqrt-det"
    if name not in FUNCTIONALS:
        raise UsageError(f"unknown function {name!r}; choose from {sorted(FUNCTIONALS)}")
    return FUNCTIONALS[name]


def cmd_coeff_mc(cfg):
    cfg.need("ell", "n")
    rec = coefficient_mc(_functional(cfg), cfg.partition, cfg.ell, cfg.n, cfg.samples or 100_000, _rng(cfg),
                         workers=cfg.workers)
    emit(cfg, _record_rows(rec))


def cmd_coeff_radial(cfg):
    cfg.need("ell", "n")
    rec = radial_coefficient_integral(_functional(cfg), cfg.partition, cfg.ell, cfg.n, cfg.samples or 100_000,
                                      _rng(cfg), workers=cfg.workers)
    emit(cfg, _record_rows(rec))


def cmd_variance_expansion(cfg):
    cfg.need("ell", "n")
    K = cfg.K or 6
    terms = variance_terms(det_expansion(cfg.ell, cfg.n, K), K)
    rows, total = [], 0.0
    for k, term in enumerate(terms, 1):
        total += term
        rows.append({"k": k, "term": term, "partial_sum": total})
    emit(cfg, rows)


def _ellipsoid(cfg):
    cfg.need("sigma")
    sigma = parse_matrix(cfg.sigma)
    strict = bool(np.linalg.eigvalsh(sigma).min() > 0) if sigma.shape[0] == sigma.shape[1] else True
    return EllipsoidSpec(sigma, strict=strict)


def _volume_row(v):
    return {"value": v.value, "route": v.route, "std_error": "" if v.std_error is None else v.std_error}


def cmd_geometry_intrinsic(cfg):
    cfg.need("ell")
    E = _ellipsoid(cfg)
    v = intrinsic_volume(E, cfg.ell, cfg.samples or 200_000, _rng(cfg), cfg.route or "kubota", workers=cfg.workers)
    emit(cfg, [{"j": cfg.ell, **_volume_row(v)}])


def cmd_geometry_mixed(cfg):
    cfg.need("ell")
    E = _ellipsoid(cfg)
    v = mixed_volume_ellipsoid_ball(E, cfg.ell, cfg.samples or 200_000, _rng(cfg), cfg.route or "kubota",
                                    workers=cfg.workers)
    emit(cfg, [{"ell": cfg.ell, **_volume_row(v)}])


def cmd_geometry_steiner(cfg):
    cfg.need("eps")
    res = steiner_check(_ellipsoid(cfg), cfg.eps, cfg.samples or 1_000_000, _rng(cfg))
    emit(cfg, [{"eps": cfg.eps, "mc_volume": res.mc_volume, "mc_std_error": res.mc_std_error,
                "steiner_value": res.steiner_value, "rel_diff": res.rel_diff}])


def cmd_mehler_apply(cfg):
    cfg.need("matrix", "t", "a")
    kappa = cfg.partition
    X = parse_matrix(cfg.matrix)
    ell, n = X.shape
    spec = MehlerSpec(cfg.t, tuple(parse_vector(cfg.a)))
    est = mehler_apply(hermite_functional(kappa, ell, n), X, spec, cfg.samples or 200_000, _rng(cfg), workers=cfg.workers)
    h = float(hermite_eval(kappa, X, MatPolyContext(ell, n, get_table(max(kappa.weight, 4)))))
    ratio = eigenvalue_ratio(kappa, spec)
    se = float(est.std_error)
    emit(cfg, [{"kappa": kappa, "estimate": float(est.value), "std_error": se, "eigenvalue_ratio": ratio,
                "predicted": ratio * h, "z_score": (float(est.value) - ratio * h) / se if se > 0 else 0.0}])


def cmd_mehler_covariance(cfg):
    cfg.need("ell", "n")
    kappa = cfg.partition
    sigma = parse_partition(str(cfg.kappa2)) if cfg.kappa2 is not None else kappa
    stream = _rng(cfg)
    if cfg.rho is not None:
        spec = CorrelationSpec.rigid(cfg.rho, cfg.n)
    elif cfg.matrix is not None:
        spec = CorrelationSpec(parse_matrix(cfg.matrix), "given")
    else:
        spec = random_correlation(cfg.n, stream.spawn(2**32).generator())
    res = correlated_hermite_covariance(kappa, sigma, spec, _ctx(cfg, max(kappa, sigma, key=lambda p: p.weight)),
                                        cfg.samples or 200_000, stream, workers=cfg.workers)
    emit(cfg, [{"kappa": res.kappa, "sigma": res.sigma, "R_label": res.label, "estimate": res.estimate,
                "std_error": res.std_error, "closed_form": res.closed_form, "z_score": res.z_score}])


def _wave_config(cfg, replicates_default=500):
    cfg.need("n")
    return arw.WaveConfig(n=cfg.n, ell=cfg.ell or 1, grid=cfg.grid, replicates=cfg.replicates or replicates_default,
                          seed=cfg.seed)


def cmd_arw_freq(cfg):
    cfg.need("n")
    freq = arw.build_frequency_set(cfg.n)
    rows = [{"l1": int(a), "l2": int(b), "l3": int(c)} for a, b, c in freq.lambdas]
    summary = {"n": cfg.n, "N_n": freq.N, "half_set_size": len(freq.half_set)}
    if cfg.format is None and cfg.out is None:
        sys.stdout.write(f"N_n = {freq.N}\n")
        return
    emit(cfg, rows, summary)


def _arw_emit(cfg, run, summary):
    if cfg.format == "csv":
        emit(cfg, list(run.rows()), summary)
    else:
        emit(cfg, [], summary)


def cmd_arw_mean(cfg):
    wc = _wave_config(cfg)
    run = arw.run_replicates(wc, cfg.workers)
    _arw_emit(cfg, run, arw.mean_experiment(wc, run=run))


def cmd_arw_variance(cfg):
    wc = _wave_config(cfg, 1000)
    run = arw.run_replicates(wc, cfg.workers)
    _arw_emit(cfg, run, arw.variance_experiment(wc, run=run))


def cmd_arw_clt(cfg):
    wc = _wave_config(cfg, 1000)
    run = arw.run_replicates(wc, cfg.workers)
    _arw_emit(cfg, run, arw.clt_experiment(wc, run=run))


def cmd_arw_diagnostics(cfg):
    cfg.need("n")
    d = arw.covariance_diagnostics(arw.build_frequency_set(cfg.n), cfg.grid)
    emit(cfg, [asdict(d)], {"n": d.n, "N_n": d.N})


def cmd_suite_acceptance(cfg):
    from .acceptance import run_suite

    select = [int(x) for x in cfg.criteria.split(",")] if cfg.criteria else None
    results = run_suite(select, seed=cfg.seed, workers=cfg.workers, echo=lambda s: print(s, flush=True))
    if cfg.out:
        Path(cfg.out).write_text(json.dumps({"metadata": metadata(cfg), "results": [r.to_dict() for r in results]},
                                            indent=2, default=_jsonable))
    return 0 if all(r.passed for r in results) else 1


HANDLERS = {
    "tables build": cmd_tables_build,
    "tables show": cmd_tables_show,
    "eval zonal": cmd_eval_zonal,
    "eval hermite": cmd_eval_hermite,
    "eval laguerre": cmd_eval_laguerre,
    "coeff det": cmd_coeff_det,
    "coeff det-sigma": cmd_coeff_det_sigma,
    "coeff mc": cmd_coeff_mc,
    "coeff radial": cmd_coeff_radial,
    "variance-expansion": cmd_variance_expansion,
    "geometry intrinsic": cmd_geometry_intrinsic,
    "geometry mixed": cmd_geometry_mixed,
    "geometry steiner": cmd_geometry_steiner,
    "mehler apply": cmd_mehler_apply,
    "mehler covariance": cmd_mehler_covariance,
    "arw freq": cmd_arw_freq,
    "arw mean": cmd_arw_mean,
    "arw variance": cmd_arw_variance,
    "arw clt": cmd_arw_clt,
    "arw diagnostics": cmd_arw_diagnostics,
    "suite acceptance": cmd_suite_acceptance,
}


# ---------------------------------------------------------------- parsing


def _add_options(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS  # absent flags stay absent so config values survive
    p.add_argument("--config", default=S, help="JSON file of settings; flags override it")
    p.add_argument("--l", "--ell", dest="ell", type=int, default=S, help="rows of the matrix / number of field copies")
    p.add_argument("--n", type=int, default=S, help="columns of the matrix / frequency radius squared")
    p.add_argument("--kappa", default=S, help="partition such as 2,1 ('0' is empty)")
    p.add_argument("--kappa2", default=S, help="second partition for covariances")
    p.add_argument("--sigma", default=S, help="covariance matrix, inline '1,0;0,2' or a file")
    p.add_argument("--matrix", "--X", dest="matrix", default=S, help="evaluation matrix or correlation R")
    p.add_argument("--eigs", default=S, help="comma-separated eigenvalues")
    p.add_argument("--gamma", type=float, default=S)
    p.add_argument("--t", type=float, default=S)
    p.add_argument("--a", default=S, help="diagonal of A, comma-separated")
    p.add_argument("--rho", type=float, default=S)
    p.add_argument("--K", type=int, default=S)
    p.add_argument("--degree", type=int, default=S)
    p.add_argument("--route", default=S, choices=["kubota", "stiefel", "determinant"])
    p.add_argument("--function", default=S, choices=sorted(FUNCTIONALS))
    p.add_argument("--eps", type=float, default=S)
    p.add_argument("--criteria", default=S, help="comma-separated criterion numbers")
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--replicates", type=int, default=S)
    p.add_argument("--grid", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--format", default=S, choices=["csv", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matherm", description="Matrix Hermite polynomials, chaos coefficients and random waves.")
    parser.add_argument("--version", action="version", version=f"matherm {__version__}")
    top = parser.add_subparsers(dest="group", required=True)
    for group, subs in COMMANDS.items():
        gp = top.add_parser(group)
        if subs:
            sp = gp.add_subparsers(dest="action", required=True)
            for s in subs:
                _add_options(sp.add_parser(s))
        else:
            _add_options(gp)
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    values = vars(args).copy()
    command = " ".join(x for x in (values.pop("group"), values.pop("action", None)) if x)
    merged = load_config(values.pop("config")) if "config" in values else {}
    merged.update(values)
    return RunConfig(command=command, **merged).validate()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        status = HANDLERS[cfg.command](cfg)
        return int(status or 0)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
