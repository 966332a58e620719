"""Synthetic data, experiment runs over step-size grids, CSV/SVG output."""

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .losses import Frechet, Tyler
from .manifold import GeodesicBall, WholeManifold
from .oracle import _det_normalize, compute_regret, offline_minimize, tyler_fixed_point
from .plot import render_svg
from .rogd import Constant, Inverse, InverseSqrt, run_rogd
from .spd import SPD, matrix_fn, random_orthogonal, save_matrix, spd_dist

log = logging.getLogger(__name__)

CSV_HEADER = "t,eta_t,loss,comparator_loss,cum_regret,grad_norm"
PAPER_ETAS = (0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_TYLER_RADIUS = 3.0
RNG_NAME = f"numpy.random.PCG64 via SeedSequence, ziggurat normals (numpy {np.__version__})"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    n: int = 16
    T: int | None = None
    etas: tuple = PAPER_ETAS
    schedule: str | None = None
    mu: float = 1.0
    seed: int = 0
    ball_center: np.ndarray | None = None
    ball_radius: float | None = None
    tyler_mode: str = "ball"
    sigma: float = 0.5
    out: str | None = None
    plot: bool = True
    log_t: bool = False
    threads: int | None = None

    def __post_init__(self):
        if self.kind not in ("tyler", "frechet"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.T is None:
            self.T = 10_000 if self.kind == "tyler" else 1_000
        if self.schedule is None:
            self.schedule = "inv-sqrt" if self.kind == "tyler" else "inv-t"
        self.etas = tuple(float(e) for e in self.etas)
        self.validate()

    def validate(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError("n must be an integer >= 2")
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError("T must be an integer >= 1")
        if not self.etas or not all(e > 0 and math.isfinite(e) for e in self.etas):
            raise ConfigError("eta grid must be a nonempty list of positive numbers")
        if self.schedule not in ("const", "inv-sqrt", "inv-t"):
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if not self.mu > 0:
            raise ConfigError("mu must be positive")
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.tyler_mode not in ("ball", "paper"):
            raise ConfigError(f"unknown tyler mode {self.tyler_mode!r}")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if self.ball_radius is not None and not self.ball_radius > 0:
            raise ConfigError("ball radius must be positive")
        if self.ball_center is not None:
            c = np.asarray(self.ball_center, dtype=float)
            if c.shape != (self.n, self.n):
                raise ConfigError(f"ball center must be {self.n}x{self.n}")
            w = np.linalg.eigvalsh(0.5 * (c + c.T))
            if not w[0] > 0:
                raise ConfigError("ball center must be positive definite")

    def echo(self):
        d = asdict(self)
        if self.ball_center is not None:
            d["ball_center"] = np.asarray(self.ball_center).tolist()
        return d


@dataclass
class RunRecord:
    config: dict
    eta: float
    rows: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


# -- data ---------------------------------------------------------------------

def default_sigma_true(n, seed):
    """Well-conditioned SPD matrix, eigenvalues log-uniform in [0.5, 2]."""
    rng = np.random.default_rng(seed)
    w = np.exp(rng.uniform(math.log(0.5), math.log(2.0), size=n))
    Q = random_orthogonal(n, rng)
    S = (Q * w) @ Q.T
    return 0.5 * (S + S.T)


def gen_gaussian_samples(sigma_true, T, seed):
    """``a_t = Sigma_true^{1/2} z_t`` with ``z_t`` standard normal; rows of a
    ``(T, n)`` array."""
    root = matrix_fn(sigma_true, "sqrt")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((T, root.shape[0]))
    return Z @ root


def gen_spd_samples(sigma_true, sigma, T, seed):
    """``Y_t = Exp_{Sigma_true}(sigma Sigma_true^{1/2} W_t Sigma_true^{1/2})``.

    ``W_t`` is symmetric with standard normal diagonal and N(0, 1/n)
    off-diagonal entries. The tangent law is symmetric, so the population
    Frechet mean is ``Sigma_true``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    root = matrix_fn(sigma_true, "sqrt")
    n = root.shape[0]
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    out = []
    for _ in range(T):
        W = np.diag(rng.standard_normal(n))
        off = rng.standard_normal(len(iu[0])) / math.sqrt(n)
        W[iu] = off
        W[(iu[1], iu[0])] = off
        Y = root @ matrix_fn(sigma * W, "exp") @ root
        out.append(0.5 * (Y + Y.T))
    return out


def make_schedule(kind, eta, mu=1.0):
    if kind == "const":
        return Constant(eta)
    if kind == "inv-sqrt":
        return InverseSqrt(eta)
    if kind == "inv-t":
        return Inverse(eta, mu)
    raise ConfigError(f"unknown schedule {kind!r}")


# -- experiment ---------------------------------------------------------------

@dataclass
class _Problem:
    losses: list
    sigma_true: np.ndarray
    feasible: object
    comparator: np.ndarray
    comparator_info: dict
    normalize_iterates: bool


def _seeds(seed):
    truth, data = np.random.SeedSequence(seed).spawn(2)
    return truth, data


def _build_problem(cfg):
    truth_seed, data_seed = _seeds(cfg.seed)
    sigma_true = default_sigma_true(cfg.n, truth_seed)
    center = np.eye(cfg.n) if cfg.ball_center is None else np.asarray(cfg.ball_center, float)
    M = SPD(cfg.n)
    if cfg.kind == "tyler":
        A = gen_gaussian_samples(sigma_true, cfg.T, data_seed)
        losses = [Tyler(a) for a in A]
        if cfg.tyler_mode == "ball":
            radius = DEFAULT_TYLER_RADIUS if cfg.ball_radius is None else cfg.ball_radius
            feasible = GeodesicBall(center, radius)
            res = offline_minimize(losses, feasible)
            comp, info = res.point, _result_info(res)
            normalize = False
        else:
            feasible = WholeManifold()
            comp = _det_normalize(tyler_fixed_point(A))
            info = {"method": "tyler_fixed_point", "normalization": "det = 1"}
            normalize = True
    else:
        Ys = gen_spd_samples(sigma_true, cfg.sigma, cfg.T, data_seed)
        losses = [Frechet(Y) for Y in Ys]
        feasible = WholeManifold() if cfg.ball_radius is None else GeodesicBall(center, cfg.ball_radius)
        res = offline_minimize(losses, feasible)
        comp, info = res.point, _result_info(res)
        normalize = False
    info["distance_to_sigma_true"] = spd_dist(comp, sigma_true)
    if isinstance(feasible, GeodesicBall):
        info["ball_radius"] = feasible.radius
        info["distance_from_center"] = M.dist(feasible.center, comp)
    return _Problem(losses, sigma_true, feasible, comp, info, normalize)


def _result_info(res):
    return {"method": "offline_minimize", "objective": res.objective,
            "displacement": res.displacement, "iterations": res.iterations,
            "converged": res.converged}


def _one_run(cfg, prob, eta):
    t0 = time.perf_counter()
    sched = make_schedule(cfg.schedule, eta, cfg.mu)
    traj = run_rogd(np.eye(cfg.n) if cfg.ball_center is None else cfg.ball_center,
                    prob.losses, sched, prob.feasible)
    iterates = traj.iterates[:-1]
    if prob.normalize_iterates:
        iterates = [_det_normalize(x) for x in iterates]
    trace = compute_regret(iterates, prob.losses, prob.comparator)
    wall = time.perf_counter() - t0
    rows = {
        "t": np.arange(1, cfg.T + 1),
        "eta_t": traj.step_sizes,
        "loss": trace.learner_losses,
        "comparator_loss": trace.comparator_losses,
        "cum_regret": trace.cum_regret,
        "grad_norm": traj.grad_norms,
    }
    summary = {
        "eta": eta,
        "regret_T": trace.regret,
        "max_grad_norm": float(np.max(traj.grad_norms)),
        "sum_sq_grad_norm": float(np.sum(traj.grad_norms ** 2)),
        "comparator_grad_norm": trace.comparator_grad_norm,
        "wall_time_s": wall,
        "warnings": len(traj.warnings),
        "final_iterate_finite": bool(np.isfinite(traj.iterates[-1]).all()),
    }
    return RunRecord(cfg.echo(), eta, rows, summary), traj.iterates[-1]


def _threads(cfg):
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    try:
        return max(1, int(os.environ.get("HOROOPT_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg):
    """Run every step size in the grid on one shared data set.

    Returns one :class:`RunRecord` per eta, in grid order. A failing eta is
    recorded with its error and the remaining ones still run. When
    ``cfg.out`` is set, CSVs, the combined SVG, matrices and a JSON summary
    are written there.
    """
    prob = _build_problem(cfg)

    def job(eta):
        try:
            return _one_run(cfg, prob, eta)
        except Exception as exc:  # one eta failing must not sink the grid
            log.error("eta=%g failed: %s", eta, exc)
            return RunRecord(cfg.echo(), eta, error=f"{type(exc).__name__}: {exc}"), None

    workers = min(_threads(cfg), len(cfg.etas))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, cfg.etas))
    else:
        results = [job(eta) for eta in cfg.etas]
    records = [r for r, _ in results]
    for rec in records:
        rec.summary.setdefault("eta", rec.eta)
        rec.summary["comparator"] = prob.comparator_info
        rec.summary["rng"] = RNG_NAME
        rec.summary["backend"] = _backend.NAME
    if cfg.out is not None:
        _write_outputs(cfg, prob, results)
    return records


def _eta_tag(eta):
    return f"{eta:g}"


def format_csv(rows):
    lines = [CSV_HEADER]
    for t, e, f, c, r, g in zip(rows["t"], rows["eta_t"], rows["loss"], rows["comparator_loss"],
                                rows["cum_regret"], rows["grad_norm"]):
        lines.append(f"{int(t)},{e:.12g},{f:.12g},{c:.12g},{r:.12g},{g:.12g}")
    return "\n".join(lines) + "\n"


def write_csv(path, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(format_csv(rows))


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    cols = CSV_HEADER.split(",")
    return {k: data[:, i] for i, k in enumerate(cols)}


def emit_plot(records, path, title="", log_t=False):
    """One polyline per record labeled ``eta=<value>``; deterministic bytes."""
    records = [r for r in records if r.ok]
    if not records:
        raise ValueError("no successful records to plot")
    lengths = {len(r.rows["t"]) for r in records}
    if len(lengths) != 1:
        raise ValueError("records have different horizons")
    series = [(f"η={_eta_tag(r.eta)}", r.rows["t"].tolist(), r.rows["cum_regret"].tolist())
              for r in records]
    svg = render_svg(series, title=title, log_x=log_t)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(svg)
    return path


def _title(cfg):
    sched = {"const": "η_t = η", "inv-sqrt": "η_t = η/√t",
             "inv-t": "η_t = η/t"}[cfg.schedule]
    what = "Online Tyler M-estimation" if cfg.kind == "tyler" else "Online Fréchet mean"
    return f"{what}, SPD({cfg.n}), T={cfg.T}, {sched}"


def _write_outputs(cfg, prob, results):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    records = [r for r, _ in results]
    for rec, final in results:
        if not rec.ok:
            continue
        stem = f"{cfg.kind}_eta{_eta_tag(rec.eta)}"
        write_csv(out / f"{stem}.csv", rec.rows)
        save_matrix(out / f"{stem}_final.txt", final)
    save_matrix(out / f"{cfg.kind}_comparator.txt", prob.comparator)
    save_matrix(out / f"{cfg.kind}_sigma_true.txt", prob.sigma_true)
    if cfg.plot and any(r.ok for r in records):
        emit_plot(records, out / f"{cfg.kind}_regret.svg", _title(cfg), cfg.log_t)
    summary = {
        "config": cfg.echo(),
        "runs": [dict(rec.summary, error=rec.error) for rec in records],
    }
    with open(out / f"{cfg.kind}_summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)
