"""Command-line front end: ``twinpeaks construct | verify | plot-data``.

Exit codes are shared by every command:

    0  success
    1  a verification suite ran but at least one row failed its tolerance
    2  user or configuration error (bad model file, unknown suite or key)
    3  numerical failure, including a construct certificate that does not hold
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import peaks, quad
from . import reduce as red
from .bubble import BubbleConfig
from .polyalg import HomogeneousPoly, random_even_poly

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SEED_ENV = "TWINPEAKS_SEED"

DEFAULT_TOLS = {
    "t_residual": 1e-10,
    "reduction_rel": 1e-10,
    "mc_sigma": 4.0,
    "slope_rel": 0.10,
    "exponent_margin": 0.3,
    "mass_factor": 3.0,
    "pairing_rel": 0.15,
    "ineq_rel": 1e-6,
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model_path: Path | None
    seed: int
    output_dir: Path
    tols: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLS))
    suite: str | None = None

    def load_model(self) -> peaks.TwinPeakModel:
        if self.model_path is None:
            return peaks.symmetric_model()
        try:
            text = Path(self.model_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read model file {self.model_path}: {exc}") from exc
        try:
            return peaks.TwinPeakModel.from_json(text)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"malformed model file {self.model_path}: {exc}") from exc


# ---------------------------------------------------------------------------
# suites


@dataclass
class Row:
    name: str
    params: dict
    estimate: float
    error: float
    prediction: float
    tolerance: str
    passed: bool | None  # None marks an informational row

    @property
    def ratio(self) -> float:
        if self.prediction == 0:
            return float("nan")
        return self.estimate / self.prediction

    def csv_fields(self) -> list:
        status = "info" if self.passed is None else ("pass" if self.passed else "FAIL")
        nums = [repr(float(v)) for v in (self.estimate, self.error, self.prediction, self.ratio)]
        return [self.name, json.dumps(self.params, sort_keys=True), *nums, self.tolerance, status]


CSV_HEADER = ["row", "params", "estimate", "error", "prediction", "ratio", "tolerance", "status"]


def _loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def suite_reduction_lemma(seed: int, tols: dict, n_polys: int = 50, mc_samples: int = 20_000) -> list[Row]:
    rows = []
    rng = np.random.default_rng(seed)
    for n in (6, 7, 8, 9):
        for ell in (2, 4):
            for i in range(n_polys):
                poly = random_even_poly(n, ell, rng)
                mc_seed = int(rng.integers(0, 2**63 - 1))
                lhs, rhs, mc = quad.reduction_lemma_check(poly, mc_samples=mc_samples if i < 5 else 0, seed=mc_seed)
                rel = abs(lhs.value - rhs) / max(abs(rhs), 1e-300)
                rows.append(Row("exact", {"n": n, "ell": ell, "i": i}, lhs.value, abs(lhs.value - rhs), rhs,
                                f"rel<={tols['reduction_rel']:g}", rel <= tols["reduction_rel"]))
                if mc is not None:
                    z = abs(mc.value - rhs) / mc.abs_error if mc.abs_error > 0 else math.inf
                    rows.append(Row("monte-carlo", {"n": n, "ell": ell, "i": i, "seed": mc_seed}, mc.value,
                                    mc.abs_error, rhs, f"|z|<={tols['mc_sigma']:g}", z <= tols["mc_sigma"]))
    for n in (6, 7, 8, 9):
        for h in (1, 2):
            Jn, Jn1 = quad.j_moment(n, h, n), quad.j_moment(n, h, n + 1)
            rows.append(Row("positivity J_n-J_n+1", {"n": n, "h": h}, Jn - Jn1, 0.0, 0.0, ">0", Jn - Jn1 > 0))
            rows.append(Row("positivity J_n-2J_n+1", {"n": n, "h": h}, Jn - 2 * Jn1, 0.0, 0.0, ">0",
                            Jn - 2 * Jn1 > 0))
    return rows


SCALING_DS = (10.0, 20.0, 40.0, 80.0, 160.0)


def _unit_pair(n: int, D: float) -> BubbleConfig:
    return BubbleConfig.make(n, 1.0, 1.0, np.zeros(n), (D,) + (0.0,) * (n - 1), D)


def suite_interaction_scaling(seed: int, tols: dict, n: int = 6, Ds=SCALING_DS) -> list[Row]:
    rows = []
    half = n / 2
    for P in (1.5, 2.0, 2.5, half, 4.0, 4.5):
        Q = n - P
        vals = []
        for D in Ds:
            est = quad.interaction_s(_unit_pair(n, D), P, Q)
            vals.append(est.value)
            rows.append(Row("S", {"n": n, "P": P, "Q": Q, "D": D}, est.value, est.abs_error, float("nan"), "", None))
        if P == half:
            slope = _loglog_slope(Ds, np.array(vals) / np.log(Ds))
            target = -float(n)
            label = "slope S/ln D"
        else:
            slope = _loglog_slope(Ds, vals)
            target = -2 * min(P, Q)
            label = "slope S"
        ok = abs(slope - target) <= tols["slope_rel"] * abs(target)
        rows.append(Row(label, {"n": n, "P": P, "Q": Q}, slope, 0.0, target, f"rel<={tols['slope_rel']:g}", ok))
    return rows


def suite_weak_interaction(seed: int, tols: dict, n: int = 6, Ds=SCALING_DS) -> list[Row]:
    rows = []
    vals = []
    for D in Ds:
        v = quad.weak_interaction_norm_proxy(_unit_pair(n, D))
        vals.append(v)
        rows.append(Row("proxy", {"n": n, "D": D}, v, 0.0, float("nan"), "", None))
    expo = -_loglog_slope(Ds, vals)
    need = (n + 2) / 2 - tols["exponent_margin"]
    rows.append(Row("decay exponent", {"n": n}, expo, 0.0, (n + 2) / 2, f">={need:g}", expo >= need))
    return rows


MASS_LAMBDAS = (0.1, 0.05, 0.025)


def mass_bound_model() -> peaks.TwinPeakModel:
    """n=6, ell=2 model with rho = 0.9, wide enough that the lambda sweep is asymptotic."""
    return peaks.symmetric_model(n=6, ell=2, gamma=2.0, hbar=0.45)


def suite_mass_bound(seed: int, tols: dict, n_samples: int = 200_000) -> list[Row]:
    rows = []
    model = mass_bound_model()
    n, ell = model.n, model.ell
    ss = np.random.SeedSequence(seed)
    # m*ell = 3 < n, m*ell = 5 = n-1 stands in for m*ell = n, m*ell = 8 > n
    for m, label in ((1.5, "m*ell<n"), ((n - 1) / ell, "m*ell=n (proxy n-1)"), (4.0, "m*ell>n")):
        ratios = []
        for lam in MASS_LAMBDAS:
            child = int(ss.spawn(1)[0].generate_state(1)[0])
            cfg = BubbleConfig.make(n, lam, lam, model.q1, model.q2, model.gamma)
            res = quad.mass_bound_check(model, cfg, m, n_samples=n_samples, seed=child)
            ratios.append(res.ratio)
            rows.append(Row("mass", {"m": m, "lambda": lam, "regime": label, "seed": child}, res.estimate.value,
                            res.estimate.abs_error, res.prediction, "", None))
        spread = max(ratios) / min(ratios)
        rows.append(Row("ratio spread", {"m": m, "regime": label}, spread, 0.0, 1.0,
                        f"max/min<={tols['mass_factor']:g}", spread <= tols["mass_factor"]))
    return rows


def suite_inequalities(seed: int, tols: dict) -> list[Row]:
    rep = quad.elementary_inequality_suite(seed=seed)
    rows = []
    tol = tols["ineq_rel"]
    for beta, c in rep.beta_constants.items():
        sup = rep.beta_grid_sup[beta]
        rows.append(Row("beta constant", {"beta": beta}, c, 0.0, sup, f"fit<=sup*(1+{tol:g})", c <= sup * (1 + tol) + 1e-14))
    for M, c in rep.m_constants.items():
        sup = rep.m_grid_sup[M]
        rows.append(Row("M constant", {"M": M}, c, 0.0, sup, f"fit<=sup*(1+{tol:g})", c <= sup * (1 + tol) + 1e-14))
    for tau, ex in rep.tau_max_excess.items():
        rows.append(Row("tau subadditivity", {"tau": tau}, ex, 0.0, 0.0, "excess<=1e-12", ex <= 1e-12))
    return rows


def suite_pairing_consistency(seed: int, tols: dict, model: peaks.TwinPeakModel | None = None) -> list[Row]:
    """Quadrature pairings against the closed-form reduced gradient Cb * T.

    Bubbles sit on the peaks with scales around the explicit zero; each
    component of Cb * T is checked piece by piece (interaction and
    curvature parts of the lambda rows, interaction part of the xi rows).
    """
    rows = []
    tol = tols["pairing_rel"]

    def check(name, params, est, pred, informational=False):
        ok = None if informational else abs(est / pred - 1.0) <= tol
        rows.append(Row(name, params, est, 0.0, pred, f"|ratio-1|<={tol:g}" if not informational else "", ok))

    n = 6
    for D in (40.0, 80.0, 160.0):
        cfg = _unit_pair(n, D)
        check("leading lambda constant", {"n": n, "D": D},
              quad.io_prime_pairing(cfg, "dlambda1").value, quad.predicted_lambda_pairing(cfg))

    if model is None:
        model = peaks.symmetric_model()
    k = red.compute_constants(model.n, model.ell)
    tau = red.solve_tau(model, k)
    n, ell = model.n, model.ell
    q1, q2 = model.q1, np.array(model.q2)
    axis = (q2 - q1) / model.gamma
    for f1, f2 in ((1.0, 1.0), (0.5, 1.0), (1.0, 2.0)):
        l1, l2 = tau.lambda1 * f1, tau.lambda2 * f2
        pt = red.ReducedPoint(l1, l2, tuple(q1), tuple(q2))
        grad = red.reduced_gradient_model(pt, model, k)
        cfg = BubbleConfig.make(n, l1, l2, q1, q2, model.gamma)
        params = {"lambda1/tau": f1, "lambda2/tau": f2, "D": cfg.D}
        inter1 = l1 * quad.io_prime_pairing(cfg, "dlambda1").value
        inter2 = l2 * quad.io_prime_pairing(cfg, "dlambda2").value
        coupling = k.Cb * (l1 * l2) ** ((n - 2) / 2) / model.gamma ** (n - 2)
        check("lambda1 interaction", params, inter1, -coupling)
        check("lambda2 interaction", params, inter2, -coupling)
        pk1 = quad.peak_lambda_pairing(model, l1, 1)
        pk2 = quad.peak_lambda_pairing(model, l2, 2)
        check("lambda1 peak", params, pk1, k.Ca * abs(model.varpi(1)) * l1**ell)
        check("lambda2 peak", params, pk2, k.Ca * abs(model.varpi(2)) * l2**ell)
        if abs(grad[0]) > 1e-3 * coupling:
            check("lambda1 total", params, inter1 + pk1, grad[0])
        # xi rows: project the gradient on the peak axis
        xi1 = l1 * sum(quad.io_prime_pairing(cfg, "dxi1", j).value * axis[j - 1] for j in range(1, n + 1)
                       if abs(axis[j - 1]) > 0)
        xi2 = l2 * sum(quad.io_prime_pairing(cfg, "dxi2", j).value * axis[j - 1] for j in range(1, n + 1)
                       if abs(axis[j - 1]) > 0)
        check("xi1 interaction", params, xi1, float(grad[2:2 + n] @ axis))
        check("xi2 interaction", params, xi2, float(grad[2 + n:] @ axis))
    if all(P.terms == model.P1.terms for P in (model.P2,)) and _is_radial(model.P1):
        l1 = tau.lambda1
        off = 0.5 * l1
        est = quad.peak_xi_pairing(model, l1, off)
        pred = k.Cb * k.C2 * model.varpi(1) * l1 ** (ell - 1) * off
        check("xi1 peak (offset lambda/2)", {"lambda1/tau": 1.0, "offset/lambda": 0.5}, est, pred, informational=True)
    return rows


def _is_radial(P: HomogeneousPoly) -> bool:
    rng = np.random.default_rng(0)
    from .polyalg import evaluate_many

    u = rng.normal(size=(16, P.n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = evaluate_many(P, u)
    return bool(np.ptp(v) <= 1e-12 * max(1.0, np.max(np.abs(v))))


SUITES: dict[str, Callable[..., list[Row]]] = {
    "reduction-lemma": suite_reduction_lemma,
    "interaction-scaling": suite_interaction_scaling,
    "weak-interaction": suite_weak_interaction,
    "mass-bound": suite_mass_bound,
    "inequalities": suite_inequalities,
    "pairing-consistency": suite_pairing_consistency,
}


# ---------------------------------------------------------------------------
# commands


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_construct(cfg: RunConfig) -> int:
    model = cfg.load_model()
    violations = peaks.validate(model)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    if violations:
        lines = ["model violates the hypotheses:"] + [f"  {v}" for v in violations]
        (cfg.output_dir / "summary.txt").write_text("\n".join(lines) + "\n")
        print("\n".join(lines), file=sys.stderr)
        return EXIT_CONFIG
    out = red.construct(model, seed=cfg.seed)
    _write_json(cfg.output_dir / "construct.json", out)
    checks = [
        ("T(P_tau) ~ 0", out["T_residual_scaled"] <= cfg.tols["t_residual"], f"{out['T_residual_scaled']:.3e}"),
        ("det J(P_tau) < 0", out["det_sign"] < 0, str(out["det_sign"])),
        ("degree = -1", out["degree"] == -1, str(out["degree"])),
        ("one root cluster", out["n_root_clusters"] == 1, str(out["n_root_clusters"])),
    ]
    lines = [f"construct n={model.n} ell={model.ell} gamma={model.gamma:g} seed={cfg.seed}",
             f"D_tau = {out['D_tau']:.6g}   gamma_o(D>={out['D_threshold']:g}) = {out['gamma_o']:.6g}"]
    lines += [f"{'PASS' if ok else 'FAIL'}  {name}  ({val})" for name, ok, val in checks]
    (cfg.output_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_NUMERICAL


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.suite not in SUITES:
        raise ConfigError(f"unknown suite {cfg.suite!r}; choose from {', '.join(SUITES)}")
    fn = SUITES[cfg.suite]
    if cfg.suite == "pairing-consistency":
        rows = fn(cfg.seed, cfg.tols, model=cfg.load_model())
    else:
        rows = fn(cfg.seed, cfg.tols)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.output_dir / f"{cfg.suite}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(r.csv_fields())
    checked = [r for r in rows if r.passed is not None]
    failed = [r for r in checked if not r.passed]
    lines = [f"suite {cfg.suite} seed={cfg.seed}: {len(checked) - len(failed)}/{len(checked)} rows pass"]
    lines += [f"FAIL  {r.name} {json.dumps(r.params, sort_keys=True)}  estimate={r.estimate:.6g} "
              f"prediction={r.prediction:.6g}  ({r.tolerance})" for r in failed]
    (cfg.output_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def cmd_plot_data(cfg: RunConfig) -> int:
    src = cfg.output_dir / "construct.json"
    if not src.exists():
        raise ConfigError(f"{src} not found; run `twinpeaks construct --out {cfg.output_dir}` first")
    try:
        data = json.loads(src.read_text())
        model = peaks.TwinPeakModel.from_dict(data["model"])
        pt = data["P_tau"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed {src}: {exc}") from exc
    n = model.n
    xi1, xi2 = np.array(pt["xi1"]), np.array(pt["xi2"])
    l1, l2 = pt["lambda1"], pt["lambda2"]
    q1, q2 = model.q1, np.array(model.q2)
    axis = (q2 - q1) / model.gamma
    g = model.gamma
    # arclength s from q1 along the axis; dense near both bubble centers
    s = np.concatenate([
        np.linspace(-0.5 * g, 1.5 * g, 801),
        float((xi1 - q1) @ axis) + l1 * np.linspace(-20, 20, 401),
        float((xi2 - q1) @ axis) + l2 * np.linspace(-20, 20, 401),
    ])
    s = np.unique(s)
    pts = q1 + s[:, None] * axis
    e = (n - 2) / 2
    v1 = (l1 / (l1**2 + np.sum((pts - xi1) ** 2, axis=1))) ** e
    v2 = (l2 / (l2**2 + np.sum((pts - xi2) ** 2, axis=1))) ** e
    with open(cfg.output_dir / "profile.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s [length]", "V1 [length^-(n-2)/2]", "V2 [length^-(n-2)/2]", "V1+V2 [length^-(n-2)/2]"])
        for row in zip(s, v1, v2, v1 + v2):
            w.writerow([repr(float(x)) for x in row])
    K = peaks.k_eval_many(model, pts)
    with open(cfg.output_dir / "k_profile.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s [length]", "K [length^-2]"])
        for row in zip(s, K):
            w.writerow([repr(float(x)) for x in row])
    k = red.compute_constants(n, model.ell)
    with open(cfg.output_dir / "gamma_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma [length]", "lambda1_tau [length]", "lambda2_tau [length]", "D_tau [dimensionless]",
                    "|xi1_tau - q1| [length]"])
        for gam in model.gamma * np.logspace(-1, 1, 21):
            sol = red.solve_tau_full(model.with_gamma(float(gam)), k)
            w.writerow([repr(float(gam)), repr(sol.point.lambda1), repr(sol.point.lambda2), repr(sol.D_tau),
                        repr(float(np.linalg.norm(sol.point.xi1)))])
    print(f"wrote profile.csv, k_profile.csv, gamma_sweep.csv under {cfg.output_dir}")
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "plot-data": cmd_plot_data}


# ---------------------------------------------------------------------------
# argument handling


def _parse_seed(raw: str, source: str) -> int:
    try:
        seed = int(raw, 0)
    except ValueError as exc:
        raise ConfigError(f"{source}: seed {raw!r} is not an integer") from exc
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{source}: seed must be an unsigned 64-bit integer")
    return seed


def _parse_tols(items: list[str]) -> dict[str, float]:
    tols = dict(DEFAULT_TOLS)
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects key=value, got {item!r}")
        if key not in DEFAULT_TOLS:
            raise ConfigError(f"unknown tolerance key {key!r}; known: {', '.join(sorted(DEFAULT_TOLS))}")
        try:
            tols[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"tolerance {key} needs a number, got {val!r}") from exc
    return tols


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", type=Path, default=None, help="model JSON (default: symmetric n=6 ell=2 model)")
    common.add_argument("--seed", default=None, help=f"64-bit seed (default ${SEED_ENV} or 0)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VAL", help="override a tolerance")
    parser = _Parser(prog="twinpeaks", description="Two-bubble reduction experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("construct", parents=[common], help="solve T = 0 and certify the degree")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", required=True, help=", ".join(SUITES))
    sub.add_parser("plot-data", parents=[common], help="CSV cross-sections from a construct run")
    return parser


def make_config(argv: list[str] | None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.seed is not None:
        seed = _parse_seed(args.seed, "--seed")
    elif os.environ.get(SEED_ENV):
        seed = _parse_seed(os.environ[SEED_ENV], SEED_ENV)
    else:
        seed = 0
    return RunConfig(command=args.command, model_path=args.model, seed=seed, output_dir=args.out,
                     tols=_parse_tols(args.tol), suite=getattr(args, "suite", None))


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = make_config(argv)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"twinpeaks: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except red.NumericalFailure as exc:
        print(f"twinpeaks: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
