"""Command-line front end: table generators and the verify suites.

Exit codes: 0 success, 1 a verify check failed, 2 bad flags or an empty
grid, 3 a numeric failure, 4 a test function reaching past the certified
length spectrum.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import morselab, plancherel, rootsys, spherical, testfn, weyl_main
from .reports import atomic_write, csv_text, json_text
from .special import PoleError

EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_SUPPORT = 4


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    threads: int = 1
    form: str = "killing"
    output_format: str = "csv"
    output_path: str | None = None
    constants: str | None = None


@dataclass
class Table:
    name: str
    columns: list
    rows: list
    meta: dict


def _pmap(fn, items, threads):
    """Ordered map; the thread count changes scheduling, never the result order."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# flag parsing helpers

_PI_EXPR = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*(pi)?\s*$")


def parse_real(text: str) -> float:
    """A float, optionally with a trailing 'pi' factor ('4pi', '2*pi', 'pi')."""
    m = _PI_EXPR.match(text)
    if not m or (not m.group(1) and not m.group(2)):
        raise UsageError(f"cannot parse number {text!r}")
    coef = float(m.group(1)) if m.group(1) not in ("", "+", "-") else float(m.group(1) + "1")
    return coef * (math.pi if m.group(2) else 1.0)


def parse_list(text: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise UsageError("empty list")
    return [parse_real(p) for p in parts]


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0 or hi < lo:
        raise UsageError("empty grid")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


# ---------------------------------------------------------------------------
# commands

def cmd_plancherel(args, cfg: RunConfig) -> list[Table]:
    rootsys._check_rank(args.n)
    us = _grid(0.0, args.u_max, args.step)
    if args.n == 2:
        direction = np.array([1.0, -1.0])
    else:
        direction = rootsys.rho(args.n).coords.copy()
        direction /= rootsys.CartanVector(direction, cfg.form).norm(dual=True)
    lam = 1j * np.multiply.outer(us, direction)
    beta = np.atleast_1d(plancherel.beta(lam))
    bt = np.atleast_1d(plancherel.beta_tilde(1.0, lam))
    cols = ["u", "beta", "beta_tilde", "ratio"]
    rows = []
    for u, b, t in zip(us, beta, bt):
        row = [u, b, t, b / t]
        if args.n == 2:
            row.append(float(plancherel.beta_sl2_closed_form(u)))
        rows.append(row)
    if args.n == 2:
        cols.append("closed_form")
    return [Table("plancherel", cols, rows, {"n": args.n, "direction": direction})]


def _domain(args, r):
    if args.domain == "ball":
        return weyl_main.SpectralDomain.ball(r, args.radius)
    return weyl_main.SpectralDomain.box([args.radius] * r)


def cmd_main_term(args, cfg: RunConfig) -> list[Table]:
    rootsys._check_rank(args.n)
    ts = parse_list(args.t)
    if any(t <= 0 for t in ts):
        raise UsageError("t values must be positive")
    d, r = rootsys.dims(args.n)
    dom = _domain(args, r)
    vals = _pmap(lambda t: weyl_main.main_term(dom, t, args.n, cfg.form, seed=cfg.seed), ts, cfg.threads)
    slope = None
    if len(ts) >= 2:
        from .fits import loglog_fit
        slope, _ = loglog_fit(ts, [v["value"] for v in vals])
    volume = parse_real(args.volume) if args.volume is not None else None
    const = weyl_main.weyl_constant(args.n, volume) if volume is not None else None
    cols = ["n", "domain", "t", "main_term", "stderr_or_tol", "slope", "d"]
    cols += ["constant"] if const is not None else []
    rows = []
    for t, v in zip(ts, vals):
        row = [args.n, args.domain, t, v["value"], v["tol"], slope if slope is not None else float("nan"), d]
        if const is not None:
            row.append(const)
        rows.append(row)
    return [Table("main_term", cols, rows, {"n": args.n, "domain": args.domain, "radius": args.radius})]


def cmd_spherical(args, cfg: RunConfig) -> list[Table]:
    rootsys._check_rank(args.n)
    nu = np.asarray(parse_list(args.nu)) if args.nu else np.zeros(args.n)
    x = np.asarray(parse_list(args.x)) if args.x else np.zeros(args.n)
    if nu.size != args.n or x.size != args.n:
        raise UsageError("--nu and --x need n comma-separated values")
    lam = rootsys.SpectralPoint.imaginary(nu)
    g = spherical.GroupPoint.diagonal(x)
    spec = spherical.QuadratureSpec(sample_count=args.samples, seed=cfg.seed)
    est = spherical.spherical_phi(lam, g, spec)
    rows = [[est.value.real, est.value.imag, est.stderr, est.samples]]
    return [Table("spherical", ["re", "im", "stderr", "samples"], rows,
                  {"n": args.n, "nu": nu, "x": x})]


def cmd_testfn(args, cfg: RunConfig) -> list[Table]:
    if args.r < 1:
        raise UsageError("--r must be >= 1")
    h = testfn.make_autocorrelation(args.g_radius, grid_size=args.grid, r=args.r, normalize="h0")
    xs = _grid(0.0, args.xi_max, args.step)
    direction = np.zeros(args.r)
    direction[0] = 1.0
    vals = np.real(h.fourier_xi(np.multiply.outer(xs, direction)))
    rows = [[x, v] for x, v in zip(xs, vals)]
    meta = {"r": args.r, "g_radius": args.g_radius, "h0": h.at_zero()}
    if args.abel:
        if args.r != 1:
            raise UsageError("--abel needs --r 1")
        meta["abel_roundtrip"] = testfn.abel_roundtrip_sl2(h, cfg.form)
    return [Table("testfn", ["xi", "hhat"], rows, meta)]


def cmd_sl2(args, cfg: RunConfig) -> list[Table]:
    from .sl2tf import groups, lengths, scattering, trace
    grp = groups.group_data(args.level)
    if args.h_radius <= 0:
        raise UsageError("--h-radius must be positive")
    if args.t_max is None and args.lambda_max is None:
        raise UsageError("give --t-max and/or --lambda-max")
    if args.length_cache:
        spec = lengths.length_spectrum(grp.N, args.h_radius, cache_dir=args.length_cache)
    else:
        bound = groups.trace_congruence_bound(grp.N)
        spec = lengths.LengthSpectrum(grp.N, args.h_radius, math.nextafter(bound, 0.0), [], False)
    scat = scattering.load_constants(grp.N, cfg.constants)
    h = trace.selberg_autocorrelation(args.h_radius, "killing")
    tables = []
    if args.t_max is not None:
        ts = _grid(0.0, args.t_max, args.t_step)
        ev = trace.geometric_side_grid(h, ts, grp, spec, scat)
        cols = ["t", "identity", "hyperbolic", "scatter_int", "scatter_half", "digamma_int",
                "m_half", "log2", "total"]
        tables.append(Table("terms", cols, [[e.t, *e.terms(), e.total] for e in ev],
                            {"N": grp.N, "h_radius": args.h_radius}))
    if args.lambda_max is not None:
        step = args.lambda_step or args.lambda_max / 8.0
        lams = _grid(step, args.lambda_max, step)
        res = _pmap(lambda l: trace.smoothed_count(h, float(l), grp, spec, scat), lams, cfg.threads)
        rows = [[r["lambda"], r["integral"], r["weyl_prediction"], r["residual"]] for r in res]
        tables.append(Table("count", ["lambda", "integral", "weyl_prediction", "residual"], rows,
                            {"N": grp.N, "h_radius": args.h_radius, "area_over_2pi": grp.area / (2 * math.pi)}))
    return tables


def cmd_morse(args, cfg: RunConfig) -> list[Table]:
    Q = tuple(int(v) for v in parse_list(args.Q)) if args.Q else (args.n - 1, 1)
    pc = morselab.PhaseConfiguration(args.n, Q, form=cfg.form)
    rows = []
    for w in rootsys.weyl_group(args.n):
        hp = morselab.hessian_pairing(pc, w)
        rows.append(["".join(map(str, w.perm)), morselab.critical_residual(pc, w),
                     float(hp.singular_values.min()), hp.lower_bound, hp.fd_relative_error])
    tables = [Table("critical_points", ["w", "residual", "min_singular", "lower_bound", "fd_rel_error"],
                    rows, {"n": args.n, "Q": Q})]
    if args.models:
        mc = morselab.MCSpec(samples=args.samples, seed=cfg.seed)
        mrows = []
        for case in morselab.MODEL_CASES:
            rep = morselab.model_case_report(case, mc)
            mrows.append([case, rep["volume"]["slope"], rep["reciprocal"]["slope"], rep["pass"]])
        tables.append(Table("morse_models", ["case", "volume_slope", "reciprocal_slope", "pass"], mrows, {}))
    return tables


# ---------------------------------------------------------------------------
# verify suites (small, fast versions of the invariant checks)

def _check(name, passed, **detail):
    return {"check": name, "pass": bool(passed), **detail}


def _suite_plancherel(cfg):
    u = np.arange(0.0, 50.0 + 1e-9, 0.01)
    lam = 1j * np.stack([u, -u], axis=1)
    dev = np.abs(plancherel.beta(lam) - plancherel.beta_sl2_closed_form(u)) / (1 + u * u)
    y = np.linspace(0.1, 40, 400)
    oracle = np.abs(np.exp(plancherel.log_abs_phi_sq_imag(y)) - plancherel.abs_phi_sq_imag_oracle(y)).max()
    out = [_check("beta_sl2_closed_form", dev.max() <= 1e-10, max_dev=float(dev.max())),
           _check("phi_modulus_oracle", oracle <= 1e-10 * 40, max_dev=float(oracle))]
    for n in (2, 3):
        out.append(plancherel.verify_plnchbnd(n, sample_count=2400, seed=cfg.seed, form=cfg.form)
                   | {"check": f"plnchbnd_n{n}"})
    out.append(plancherel.verify_logderbnd(2, sample_count=1200, seed=cfg.seed, form=cfg.form))
    out.extend(plancherel.verify_scr(3, sample_count=4800, seed=cfg.seed, form=cfg.form))
    return out


def _suite_spherical(cfg):
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for n in (2, 3, 4):
        for _ in range(100):
            g = spherical.GroupPoint.normalized(rng.standard_normal((n, n)) + 2 * np.eye(n))
            worst = max(worst, float(np.abs(spherical.iwasawa_H(g).coords - spherical.iwasawa_H_minors(g)).max()))
    k = spherical.kostant_check(rootsys.CartanVector([1.0, 0.2, -1.2]),
                                spherical.QuadratureSpec(sample_count=2000, seed=cfg.seed))
    b = spherical.verify_bounds(2, points=10, samples=20_000, seed=cfg.seed)
    est = spherical.spherical_phi(rootsys.SpectralPoint.imaginary([0.7, -0.7]),
                                  spherical.GroupPoint.diagonal([0.4, -0.4]),
                                  spherical.QuadratureSpec("product_angles", 4096))
    ref = spherical.spherical_phi_sl2_oracle(0.7, 0.4)
    return [_check("iwasawa_minors", worst <= 1e-10, max_dev=worst), k, b,
            _check("sl2_oracle", abs(est.value - ref) <= 1e-8, dev=abs(est.value - ref))]


def _suite_testfn(cfg):
    h = testfn.make_autocorrelation(2.0, grid_size=256, r=1, normalize="h0")
    ab = testfn.abel_roundtrip_sl2(h, cfg.form)
    xs = np.linspace(0, 30, 61)[:, None]
    neg = float(np.real(h.fourier_xi(xs)).min())
    smp = testfn.verify_smp(2, ts=np.arange(1, 21), mu_per_t=2, seed=cfg.seed, form=cfg.form)
    return [ab, _check("hhat_nonnegative", neg >= -1e-12, min=neg),
            _check("h0_normalized", abs(h.at_zero() - 1.0) <= 1e-12, h0=h.at_zero()), smp]


def _suite_weyl(cfg):
    ex = weyl_main.exponent_fit(2, [50, 100, 150, 200], form=cfg.form)
    c = weyl_main.weyl_constant(2, 4 * math.pi)
    dom = weyl_main.SpectralDomain.ball(2)
    inv = weyl_main.check_W_invariance(dom, 3, samples=500, seed=cfg.seed, form=cfg.form)
    mt = weyl_main.main_term(weyl_main.SpectralDomain.ball(1), 10.0, 2, cfg.form)["value"]
    orc = weyl_main.main_term_sl2_oracle(10.0, cfg.form)
    return [ex | {"check": "exponent_fit_n2"}, _check("weyl_constant_sl2", abs(c - 1.0) <= 1e-15, value=c),
            _check("ball_W_invariant", inv), _check("main_term_oracle", abs(mt / orc - 1) <= 1e-5,
                                                     rel=abs(mt / orc - 1))]


def _suite_sl2(cfg):
    from .sl2tf import groups, lengths, scattering, trace
    out = []
    for N in (3, 4):
        out.append(_check(f"sl2_index_{N}", groups.sl2_index(N) == groups.sl2_order_by_enumeration(N)))
    tmin, _ = groups.brute_force_min_trace(3, 30)
    out.append(_check("min_trace_gamma3", tmin == 7, min_trace=tmin))
    mism = [t for t in range(3, 10) if len(lengths.sl2z_classes(t)) != lengths.brute_force_class_count(t, 30)]
    out.append(_check("form_classes_vs_brute_force", not mism, mismatched=mism))
    scat = scattering.load_constants(3, cfg.constants)
    out.append(scattering.validate_constants(scat) | {"check": "constants_gamma3"})
    out.append(scattering.verify_philog(3, scat, r_max=100.0, points=400) | {"check": "philog_gamma3"})
    grp = groups.group_data(3)
    spec = lengths.length_spectrum(3, 3.8)
    h = trace.selberg_autocorrelation(3.8)
    pos = trace.check_positivity(h, np.arange(0.0, 40.0 + 1e-9, 2.0), grp, spec, scat)
    out.append({k: v for k, v in pos.items() if k != "evaluations"} | {"check": "spectral_positivity"})
    return out


def _suite_morse(cfg):
    out = []
    for Q in ((2, 1), (1, 2)):
        pc = morselab.PhaseConfiguration(3, Q, form=cfg.form)
        tag = "Q" + "".join(map(str, Q))
        res = max(morselab.critical_residual(pc, w) for w in rootsys.weyl_group(3))
        hps = [morselab.hessian_pairing(pc, w) for w in rootsys.weyl_group(3)]
        out.append(_check(f"critical_points_{tag}", res <= 1e-8 * pc.xi.norm(), max_residual=res))
        out.append(_check(f"hessian_{tag}", all(h.nonsingular and h.fd_relative_error <= 1e-6 for h in hps),
                          max_fd_rel=max(h.fd_relative_error for h in hps)))
        out.append(_check(f"levi_invariance_{tag}", morselab.levi_invariance_defect(pc, seed=cfg.seed) <= 1e-10))
    mc = morselab.MCSpec(samples=50_000, seed=cfg.seed)
    for case in morselab.MODEL_CASES:
        rep = morselab.model_case_report(case, mc)
        out.append(_check(f"morse_{case}", rep["pass"], volume_slope=rep["volume"]["slope"],
                          reciprocal_slope=rep["reciprocal"]["slope"]))
    return out


SUITES = {
    "plancherel": _suite_plancherel,
    "spherical": _suite_spherical,
    "testfn": _suite_testfn,
    "weyl": _suite_weyl,
    "sl2": _suite_sl2,
    "morse": _suite_morse,
}


def run_verify(suite: str, cfg: RunConfig) -> list[dict]:
    names = list(SUITES) if suite == "all" else [suite]
    out = []
    for name in names:
        for rec in SUITES[name](cfg):
            out.append({"suite": name, **rec})
    return out


# ---------------------------------------------------------------------------
# output

def _render(tables: list[Table], fmt: str) -> str:
    if fmt == "json":
        payload = {t.name: {"columns": t.columns, "rows": t.rows, "meta": t.meta} for t in tables}
        return json_text(payload)
    return "".join(csv_text(t.columns, t.rows) for t in tables[:1])


def _emit(tables: list[Table], cfg: RunConfig):
    if cfg.output_format == "csv" and len(tables) > 1:
        if not cfg.output_path:
            sys.stdout.write("\n".join(_render([t], "csv") for t in tables))
            return
        base = Path(cfg.output_path)
        for t in tables:
            atomic_write(base.with_name(f"{base.stem}.{t.name}{base.suffix or '.csv'}"), _render([t], "csv"))
        return
    text = _render(tables, cfg.output_format)
    if cfg.output_path:
        atomic_write(cfg.output_path, text)
    else:
        sys.stdout.write(text)


def _verify_text(records: list[dict]) -> str:
    lines = []
    for r in records:
        tag = "PASS" if r["pass"] else "FAIL"
        lines.append(f"{tag} {r['suite']}:{r['check']}" + (f" [{r['levi']}]" if "levi" in r else ""))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--form", choices=list(rootsys.FORMS), default="killing")
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--constants", default=None, help="scattering constants JSON")

    p = _Parser(prog="weyl-lab", description="Weyl-law numerical laboratory", parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("plancherel", parents=[common])
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--u-max", type=float, required=True)
    q.add_argument("--step", type=float, default=0.1)

    q = sub.add_parser("main-term", parents=[common])
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--domain", choices=["ball", "box"], default="ball")
    q.add_argument("--radius", type=float, default=1.0)
    q.add_argument("--t", required=True)
    q.add_argument("--volume", default=None)

    q = sub.add_parser("spherical", parents=[common])
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--nu", default=None, help="comma-separated real coordinates; lambda = i nu")
    q.add_argument("--x", default=None, help="comma-separated log-diagonal of g")
    q.add_argument("--samples", type=int, default=10_000)

    q = sub.add_parser("testfn", parents=[common])
    q.add_argument("--r", type=int, default=1)
    q.add_argument("--g-radius", type=float, default=2.0)
    q.add_argument("--grid", type=int, default=256)
    q.add_argument("--xi-max", type=float, default=10.0)
    q.add_argument("--step", type=float, default=0.5)
    q.add_argument("--abel", action="store_true")

    q = sub.add_parser("sl2", parents=[common])
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--h-radius", type=float, default=3.8)
    q.add_argument("--t-max", type=float, default=None)
    q.add_argument("--t-step", type=float, default=0.5)
    q.add_argument("--lambda-max", type=float, default=None)
    q.add_argument("--lambda-step", type=float, default=None)
    q.add_argument("--length-cache", default=None, help="directory for the length-spectrum cache")

    q = sub.add_parser("morse", parents=[common])
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--Q", default=None, help="composition of n, e.g. 2,1")
    q.add_argument("--models", action="store_true")
    q.add_argument("--samples", type=int, default=200_000)

    q = sub.add_parser("verify", parents=[common])
    q.add_argument("--suite", default="all")
    return p


COMMANDS = {
    "plancherel": cmd_plancherel,
    "main-term": cmd_main_term,
    "spherical": cmd_spherical,
    "testfn": cmd_testfn,
    "sl2": cmd_sl2,
    "morse": cmd_morse,
}


def main(argv=None) -> int:
    from .sl2tf.groups import LevelError
    from .sl2tf.trace import SupportError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    cfg = RunConfig(args.seed, max(1, args.threads), args.form, args.format, args.out, args.constants)
    try:
        if args.command == "verify":
            if args.suite != "all" and args.suite not in SUITES:
                raise UsageError(f"unknown suite {args.suite!r}; choose all or one of {sorted(SUITES)}")
            records = run_verify(args.suite, cfg)
            text = json_text({"checks": records}) if cfg.output_format == "json" else _verify_text(records)
            if cfg.output_path:
                atomic_write(cfg.output_path, text)
            sys.stdout.write(_verify_text(records) if cfg.output_path else text)
            return 0 if all(r["pass"] for r in records) else EXIT_VERIFY
        _emit(COMMANDS[args.command](args, cfg), cfg)
        return 0
    except SupportError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_SUPPORT
    except (UsageError, LevelError, rootsys.RankError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except (PoleError, weyl_main.QuadratureError, testfn.QuadratureError, FloatingPointError,
            np.linalg.LinAlgError, ArithmeticError) as e:
        sys.stderr.write(f"numeric failure: {e}\n")
        return EXIT_NUMERIC
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
