"""Command-line front door.

Subcommands::

    maxstab model eval --spec model.json --x 1,2
    maxstab distance --pair pair.json [--exact --wasserstein --tv --psi]
    maxstab bound --pair pair.json [--all | --names tv,psi]
    maxstab verify --pair pair.json [--samples N]
    maxstab reproduce-examples

Exit codes: 0 success, 1 verification failure (bound violation or failed
band check), 2 validation error, 3 nonconvergence flag under ``--strict``.
Outputs are byte-stable for identical inputs and seeds.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as _bounds
from . import montecarlo as _mc
from .distances import SectionSearchOptions, kolmogorov_exact, wasserstein1_sup
from .errors import MaxStabError, ValidationError
from .models import (ev_copula, make_brown_resnick, make_comonotone,
                     make_independent, make_logistic, make_discrete_spectral)
from .serialize import (ExperimentSpec, ReportRow, load_json, model_from_dict,
                        pair_from_dict, parse_norm_list, render_rows)
from .spectral import DeHaanRepresenter, angular_from_representer
from .norms import NormSpec

_E = math.e


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([math.inf if tok.strip() == "inf" else float(tok)
                         for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise ValidationError(f"cannot parse vector {text!r}") from exc


def _search_opts(spec: ExperimentSpec, args) -> SectionSearchOptions:
    grid = args.grid if args.grid is not None else spec.grid
    u_max = args.umax if args.umax is not None else spec.u_max
    seed = args.seed if args.seed is not None else spec.seed
    return SectionSearchOptions(u_max=u_max, grid_points=grid, seed=seed)


def _load_pair(args) -> ExperimentSpec:
    doc = load_json(args.pair)
    return pair_from_dict(doc, base_dir=Path(args.pair).parent, strict=args.strict)


def cmd_model_eval(args) -> int:
    doc = load_json(args.spec)
    model = model_from_dict(doc, base_dir=Path(args.spec).parent, strict=args.strict)
    rows = []
    if args.x:
        x = _parse_vector(args.x)
        rows.append(ReportRow(pair_id="model", quantity="V", value=model.exponent(x),
                              method=model.family))
        rows.append(ReportRow(pair_id="model", quantity="F", value=model.cdf(x),
                              method=model.family))
    if args.stdf:
        rows.append(ReportRow(pair_id="model", quantity="stdf",
                              value=model.stdf(_parse_vector(args.stdf)),
                              method=model.family))
    if args.copula:
        rows.append(ReportRow(pair_id="model", quantity="ev_copula",
                              value=ev_copula(model, _parse_vector(args.copula)),
                              method=model.family))
    if not rows:
        raise ValidationError("nothing to evaluate: pass --x, --stdf, or --copula")
    sys.stdout.write(render_rows(rows, args.format))
    return 0


def _requested(spec: ExperimentSpec, args) -> list[str]:
    requested = [name for name in ("exact", "wasserstein", "tv", "psi")
                 if getattr(args, name.replace("-", "_"), False)]
    return requested or list(spec.compute)


def cmd_distance(args) -> int:
    spec = _load_pair(args)
    opts = _search_opts(spec, args)
    quantities = _requested(spec, args)
    rows: list[ReportRow] = []
    flags: set[str] = set()
    m1, m2 = spec.model1, spec.model2
    for quantity in quantities:
        if quantity == "exact":
            res = kolmogorov_exact(m1, m2, opts)
            flags.update(res.flags)
            rows.append(ReportRow(
                pair_id=spec.pair_id, quantity="kolmogorov_exact", value=res.value,
                certified_lower=res.certified_lower, method="section_search",
                constants={"witness_r": res.witness_r,
                           **{f"witness_u{i}": v for i, v in enumerate(res.witness_u)}},
                seed=opts.seed))
        elif quantity == "wasserstein":
            Z1, Z2 = m1.canonical_representer(), m2.canonical_representer()
            if Z1 is None or Z2 is None:
                raise ValidationError("wasserstein distance needs discrete representers")
            w, _ = wasserstein1_sup(Z1, Z2, power=True)
            rows.append(ReportRow(pair_id=spec.pair_id, quantity="wasserstein1_sup",
                                  value=w, method="transport_lp",
                                  constants={"power": m1.alpha}, seed=opts.seed))
        elif quantity == "tv":
            H1, H2 = m1.angular_measure(), m2.angular_measure()
            if H1 is None or H2 is None:
                raise ValidationError("tv distance needs discrete angular measures")
            report = _bounds.bound_tv(H1, H2, parse_norm_list(args.norms, m1.alpha))
            rows.append(ReportRow(pair_id=spec.pair_id, quantity="tv_distance",
                                  value=report.constants["tv"], method="atom_matching",
                                  constants=report.constants, seed=opts.seed))
        elif quantity == "psi":
            report = _bounds.bound_psi(m1, m2, opts=opts)
            rows.append(ReportRow(pair_id=spec.pair_id, quantity="psi_sup_discrepancy",
                                  value=report.constants["psi_sup"],
                                  method="section_search", seed=opts.seed))
        else:
            raise ValidationError(f"unknown computation {quantity!r}")
    sys.stdout.write(render_rows(rows, args.format))
    if args.strict and flags - {"heuristic"}:
        return 3
    return 0


_BOUND_NAMES = ("wasserstein", "tv", "psi", "brown_resnick", "alpha_mismatch")


def _applicable_bounds(spec: ExperimentSpec, names, opts, norms) -> list:
    m1, m2 = spec.model1, spec.model2
    H1, H2 = m1.angular_measure(), m2.angular_measure()
    same_alpha = m1.alpha == m2.alpha
    reports = []
    for name in names:
        if name == "wasserstein" and same_alpha and H1 is not None and H2 is not None:
            reports.append(_bounds.bound_wasserstein(H1, H2))
        elif name == "tv" and same_alpha and H1 is not None and H2 is not None:
            reports.append(_bounds.bound_tv(H1, H2, norms))
        elif name == "psi" and same_alpha and m1.supports_psi and m2.supports_psi:
            reports.append(_bounds.bound_psi(m1, m2, opts=opts))
        elif name == "brown_resnick" and getattr(m1, "covariance", None) is not None \
                and getattr(m2, "covariance", None) is not None:
            reports.append(_bounds.bound_brown_resnick(m1.covariance, m2.covariance))
        elif name == "alpha_mismatch" and not same_alpha \
                and _mc._same_measure_ignoring_alpha(H1, H2):
            reports.append(_bounds.bound_alpha_mismatch(H1, m1.alpha, m2.alpha))
    return reports


def cmd_bound(args) -> int:
    spec = _load_pair(args)
    opts = _search_opts(spec, args)
    norms = parse_norm_list(args.norms, spec.model1.alpha)
    names = _BOUND_NAMES if args.all else tuple(
        tok.strip() for tok in (args.names or "").split(",") if tok.strip())
    if not names:
        raise ValidationError("pass --all or --names with at least one bound")
    unknown = set(names) - set(_BOUND_NAMES)
    if unknown:
        raise ValidationError(f"unknown bounds: {', '.join(sorted(unknown))}")
    reports = _applicable_bounds(spec, names, opts, norms)
    if not reports:
        raise ValidationError("no requested bound is applicable to this pair")
    reports.sort(key=lambda r: r.bound_value)
    rows = [ReportRow(pair_id=spec.pair_id, quantity=f"bound_{r.bound_name}",
                      value=r.bound_value, method="bound",
                      constants=r.constants, seed=opts.seed)
            for r in reports]
    sys.stdout.write(render_rows(rows, args.format))
    return 0


def cmd_verify(args) -> int:
    spec = _load_pair(args)
    opts = _search_opts(spec, args)
    cfg = None
    if args.samples:
        cfg = _mc.SamplerConfig(seed=args.seed if args.seed is not None else spec.seed or 1,
                                n_samples=args.samples)
    norms = parse_norm_list(args.norms, spec.model1.alpha)
    report = _mc.verify_bounds(spec.model1, spec.model2, cfg=cfg, opts=opts, norms=norms)
    rows = [ReportRow(pair_id=spec.pair_id, quantity="kolmogorov_exact",
                      value=report.exact.value,
                      certified_lower=report.exact.certified_lower,
                      method="section_search", seed=opts.seed)]
    for r in report.rows:
        rows.append(ReportRow(pair_id=spec.pair_id, quantity=f"bound_{r.name}",
                              value=r.value, certified_lower=r.dominated,
                              method="VIOLATED" if r.violated else "ok",
                              constants=r.constants, seed=opts.seed))
    cdf_ok = True
    if cfg is not None:
        if report.mc_estimate is not None:
            value, band = report.mc_estimate
            rows.append(ReportRow(pair_id=spec.pair_id, quantity="mc_two_sample_dk",
                                  value=value, method="ecdf",
                                  constants={"band": band}, seed=cfg.seed))
        for tag, model in (("model1", spec.model1), ("model2", spec.model2)):
            sampled = _mc._sample_model(model, cfg)
            if sampled is None:
                continue
            slack = 1e-3 if not sampled.metadata.get("exact", False) else 0.0
            chk = _mc.verify_cdf(model, sampled, extra_tolerance=slack)
            cdf_ok = cdf_ok and chk.passed
            rows.append(ReportRow(pair_id=spec.pair_id, quantity=f"cdf_check_{tag}",
                                  value=chk.sup_discrepancy,
                                  method="pass" if chk.passed else "FAIL",
                                  constants={"dkw": chk.dkw_threshold}, seed=cfg.seed))
    sys.stdout.write(render_rows(rows, args.format))
    return 0 if (report.passed and cdf_ok) else 1


def _reproduce_rows() -> tuple[list[ReportRow], bool]:
    rows: list[ReportRow] = []
    all_ok = True

    def add(case, quantity, value, expected, provenance, ok):
        nonlocal all_ok
        all_ok = all_ok and ok
        rows.append(ReportRow(
            pair_id=case, quantity=quantity, value=value,
            method=provenance,
            constants={"expected": expected, "status": "pass" if ok else "FAIL"}))

    for d in range(2, 7):
        com, ind = make_comonotone(d, 1.0), make_independent(d, 1.0)
        exact = kolmogorov_exact(com, ind).value
        closed = (d - 1) / d * d ** (-1.0 / (d - 1))
        add(f"example1_d{d}", "exact_dk", exact, closed, "PAPER", abs(exact - closed) <= 1e-6)
        wb = _bounds.bound_wasserstein(com.angular_measure(), ind.angular_measure()).bound_value
        add(f"example1_d{d}", "wasserstein_bound", wb, (d - 1) / _E, "PAPER",
            abs(wb - (d - 1) / _E) <= 1e-9)
        tvb = _bounds.bound_tv(com.angular_measure(), ind.angular_measure()).bound_value
        add(f"example1_d{d}", "tv_bound", tvb, d / _E, "PAPER", abs(tvb - d / _E) <= 1e-9)

    for theta in (0.1, 0.25, 0.5, 0.75, 0.9):
        logi = make_logistic(2, theta)
        ind = make_independent(2)
        com = make_comonotone(2)
        ei = kolmogorov_exact(ind, logi).value
        bi = (2 - 2 ** theta) / _E
        add(f"example2_theta{theta:g}", "dk_vs_independent", ei, bi, "PAPER<=", ei <= bi + 1e-9)
        ec = kolmogorov_exact(com, logi).value
        bc = (2 ** theta - 1) / _E
        add(f"example2_theta{theta:g}", "dk_vs_comonotone", ec, bc, "PAPER<=", ec <= bc + 1e-9)

    S1 = np.eye(2)
    S2 = 1.44 * np.eye(2)
    br = _bounds.bound_brown_resnick(S1, S2).bound_value
    hand = math.sqrt(2.0) * 2 / (4 * _E) * (math.sqrt(2 * 0.2 ** 2) + math.sqrt(2 * 0.22 ** 2))
    add("example3_diag", "br_bound", br, hand, "DERIVED", abs(br - hand) <= 1e-9)
    S3 = np.array([[1.0, 0.5], [0.5, 1.0]])
    S4 = np.array([[1.1, 0.3], [0.3, 0.9]])
    br2 = _bounds.bound_brown_resnick(S3, S4).bound_value
    add("example3_corr", "br_bound", br2, None, "DERIVED", br2 > 0)

    Z1 = DeHaanRepresenter.from_atoms(1, 1.0, [([1.0], 1.0)])
    Z2 = DeHaanRepresenter.from_atoms(1, 1.0, [([2.0], 1 / 3), ([0.5], 2 / 3)])
    w, _ = wasserstein1_sup(Z1, Z2, power=True)
    add("intro_1d", "wasserstein1_sup", w, 2 / 3, "PAPER", abs(w - 2 / 3) <= 1e-12)
    m1 = make_discrete_spectral(angular_from_representer(Z1, NormSpec.lp(1.0)))
    m2 = make_discrete_spectral(angular_from_representer(Z2, NormSpec.lp(1.0)))
    dk = kolmogorov_exact(m1, m2).value
    add("intro_1d", "exact_dk", dk, 0.0, "PAPER", dk <= 1e-12)
    return rows, all_ok


def cmd_reproduce(args) -> int:
    rows, ok = _reproduce_rows()
    sys.stdout.write(render_rows(rows, args.format))
    return 0 if ok else 1


def _add_common(parser, search: bool = True) -> None:
    parser.add_argument("--format", choices=("table", "csv", "json-like"), default="table")
    parser.add_argument("--strict", action="store_true",
                        help="reject unknown config fields; exit 3 on nonconvergence flags")
    if search:
        parser.add_argument("--grid", type=int, default=None, metavar="N")
        parser.add_argument("--umax", type=float, default=None, metavar="X")
        parser.add_argument("--seed", type=int, default=None, metavar="S")
        parser.add_argument("--norms", type=str, default=None, metavar="p1,p2,...")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxstab",
                                     description="Kolmogorov distances and bounds "
                                                 "for max-stable distributions")
    sub = parser.add_subparsers(dest="command", required=True)

    p_model = sub.add_parser("model", help="model utilities")
    model_sub = p_model.add_subparsers(dest="model_command", required=True)
    p_eval = model_sub.add_parser("eval", help="evaluate V, F, stdf, or the EV copula")
    p_eval.add_argument("--spec", required=True, help="model specification JSON")
    p_eval.add_argument("--x", type=str, default=None, help="evaluation point, e.g. 1,2")
    p_eval.add_argument("--stdf", type=str, default=None, metavar="Z")
    p_eval.add_argument("--copula", type=str, default=None, metavar="U")
    _add_common(p_eval, search=False)
    p_eval.set_defaults(func=cmd_model_eval)

    p_dist = sub.add_parser("distance", help="exact and raw distances for a pair")
    p_dist.add_argument("--pair", required=True, help="pair specification JSON")
    for name in ("exact", "wasserstein", "tv", "psi"):
        p_dist.add_argument(f"--{name}", action="store_true")
    _add_common(p_dist)
    p_dist.set_defaults(func=cmd_distance)

    p_bound = sub.add_parser("bound", help="evaluate upper bounds for a pair")
    p_bound.add_argument("--pair", required=True)
    p_bound.add_argument("--all", action="store_true", help="every applicable bound, sorted")
    p_bound.add_argument("--names", type=str, default=None,
                         help=f"comma list from: {', '.join(_BOUND_NAMES)}")
    _add_common(p_bound)
    p_bound.set_defaults(func=cmd_bound)

    p_verify = sub.add_parser("verify", help="bound domination and sampler checks")
    p_verify.add_argument("--pair", required=True)
    p_verify.add_argument("--samples", type=int, default=None, metavar="N")
    _add_common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_rep = sub.add_parser("reproduce-examples", help="recompute the worked examples")
    _add_common(p_rep, search=False)
    p_rep.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError, KeyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MaxStabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
