"""Command-line front door.

Subcommands wrap the library modules one-to-one; matrices travel as CSV
(or the JSON matrix format), verdicts as JSON reports.  Exit codes:
0 = success / property certified, 2 = computation succeeded but the
property is refuted or not certified, 1 = usage or runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, block2, certify, compound, dense, fhn, kron, measures, metzler
from . import selftest as selftest_mod

__all__ = ["main"]


class CliError(Exception):
    """Usage-level error; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that
        raise CliError(message)


def _matrix_to_csv_text(a: np.ndarray) -> str:
    # the + 0.0 collapses IEEE negative zeros from determinant sign bookkeeping
    return "\n".join(",".join(repr(float(v) + 0.0) for v in row) for row in np.atleast_2d(a)) + "\n"


def _emit_matrix(a: np.ndarray, path: str | None) -> None:
    text = _matrix_to_csv_text(a)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_vector(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError as exc:
        raise CliError(f"{name}: expected comma-separated numbers, got {text!r}") from exc


def _write_report(path: str | None, payload: dict, config: dict, seed=None) -> None:
    if not path:
        return
    doc = dict(payload)
    doc["version"] = __version__
    doc["config"] = config
    doc["seed"] = seed
    doc["generated_at"] = datetime.now(timezone.utc).isoformat()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, float) and math.isnan(obj):
        return "nan"
    return obj


# ---------------------------------------------------------------------------
# SVG time-series plot (static, no external plotting dependency).
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _svg_timeseries(times: np.ndarray, series: np.ndarray, labels: list[str]) -> str:
    width, height = 840.0, 480.0
    ml, mr, mt, mb = 60.0, 150.0, 20.0, 40.0
    pw, ph = width - ml - mr, height - mt - mb
    t0, t1 = float(times[0]), float(times[-1])
    lo = float(series.min())
    hi = float(series.max())
    if hi - lo < 1e-12:
        hi, lo = hi + 1.0, lo - 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def sx(t):
        return ml + (t - t0) / (t1 - t0 or 1.0) * pw

    def sy(v):
        return mt + (hi - v) / (hi - lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{ml:g}" y1="{mt + ph:g}" x2="{ml + pw:g}" y2="{mt + ph:g}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{ml:g}" y1="{mt:g}" x2="{ml:g}" y2="{mt + ph:g}" '
        'stroke="black" stroke-width="1"/>',
        f'<text x="{ml:g}" y="{height - 10:g}" font-size="12">t = {t0:.6g}</text>',
        f'<text x="{ml + pw - 60:g}" y="{height - 10:g}" font-size="12">t = {t1:.6g}</text>',
        f'<text x="{5:g}" y="{mt + 10:g}" font-size="12">{hi:.6g}</text>',
        f'<text x="{5:g}" y="{mt + ph:g}" font-size="12">{lo:.6g}</text>',
    ]
    # decimate long series so files stay small; plots are qualitative
    stride = max(1, len(times) // 2000)
    for idx in range(series.shape[1]):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(
            f"{sx(float(t)):.2f},{sy(float(v)):.2f}"
            for t, v in zip(times[::stride], series[::stride, idx])
        )
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 16 + 18 * idx
        out.append(
            f'<line x1="{ml + pw + 10:g}" y1="{ly - 4:g}" x2="{ml + pw + 34:g}" y2="{ly - 4:g}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{ml + pw + 40:g}" y="{ly:g}" font-size="12">{labels[idx]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Subcommand handlers; each returns the process exit code.
# ---------------------------------------------------------------------------


def _cmd_compound(args) -> int:
    a = dense.load_matrix(args.infile)
    if args.mode == "mult":
        out = compound.mult_compound(a, args.k)
    else:
        out = compound.add_compound(a, args.k)
    _emit_matrix(out, args.out)
    return 0


def _cmd_kron(args) -> int:
    if args.op in ("product", "sum"):
        if not args.a or not args.b:
            raise CliError(f"kron --op {args.op} needs --a and --b")
        a, b = dense.load_matrix(args.a), dense.load_matrix(args.b)
        out = kron.kron_product(a, b) if args.op == "product" else kron.kron_sum(a, b)
        _emit_matrix(out, args.out)
        return 0
    if args.op == "commutation":
        if args.n is None or args.m is None:
            raise CliError("kron --op commutation needs --n and --m")
        _emit_matrix(kron.commutation_matrix(args.n, args.m), args.out)
        return 0
    if args.n is None or args.k is None:
        raise CliError("kron --op bridge needs --n and --k")
    left, right = kron.bridge(args.n, args.k)
    if args.out_l or args.out_m:
        if not (args.out_l and args.out_m):
            raise CliError("bridge needs both --out-l and --out-m (or neither)")
        _emit_matrix(left, args.out_l)
        _emit_matrix(right, args.out_m)
    else:
        sys.stdout.write("# L\n")
        _emit_matrix(left, None)
        sys.stdout.write("# M\n")
        _emit_matrix(right, None)
    return 0


def _load_blockspec(args) -> block2.BlockSpec:
    return block2.BlockSpec(
        A=dense.load_matrix(args.A),
        B=dense.load_matrix(args.B),
        C=dense.load_matrix(args.C),
        D=dense.load_matrix(args.D),
    )


def _cmd_block2(args) -> int:
    spec = _load_blockspec(args)
    config = {"mode": args.mode, "A": args.A, "B": args.B, "C": args.C, "D": args.D}
    if args.mode == "mult":
        _emit_matrix(block2.mult2_block(spec), args.out)
        return 0
    if args.mode == "add":
        _emit_matrix(block2.add2_block(spec), args.out)
        return 0
    ok, failed = block2.check_2positive_lti(spec)
    payload = {"verdict": "2-positive" if ok else "not-2-positive", "failed_conditions": failed}
    print(json.dumps(_jsonable(payload), sort_keys=True))
    _write_report(args.report, payload, config)
    return 0 if ok else 2


def _cmd_measure(args) -> int:
    a = dense.load_matrix(args.infile)
    t = dense.load_matrix(args.scale) if args.scale else None
    value = measures.scaled_measure(a, args.p, t)
    norm = measures.scaled_norm(a, args.p, t, t)
    print(f"{value!r}")
    _write_report(
        args.report,
        {"measure": value, "norm": norm},
        {"p": args.p, "in": args.infile, "scale": args.scale},
    )
    return 0


def _cmd_metzler(args) -> int:
    m = dense.load_matrix(args.infile)
    if args.order:
        order = [int(v) for v in args.order.split(",")]
        m = metzler.permute_graph(m, order)
    result = metzler.is_hurwitz_small_gain(m)
    scaling = None
    if result.hurwitz:
        scaling = metzler.diagonal_stability_scaling(m)
    payload = {
        "verdict": "hurwitz" if result.hurwitz else "not-hurwitz",
        "gains": list(result.gains),
        "scaling": scaling,
    }
    print(json.dumps(_jsonable(payload), sort_keys=True))
    _write_report(args.report, payload, {"in": args.infile, "order": args.order})
    return 0 if result.hurwitz else 2


def _build_system(config: dict) -> tuple[certify.FeedbackSystem, certify.GainConstants | None, dict]:
    try:
        sys_cfg = config["system"]
        kind = sys_cfg["kind"]
    except (KeyError, TypeError) as exc:
        raise CliError("config must contain system.kind") from exc
    domain = None
    if config.get("domain") is not None:
        domain = certify.Box(
            lower=np.asarray(config["domain"]["lower"], dtype=float),
            upper=np.asarray(config["domain"]["upper"], dtype=float),
        )
    if kind == "fhn":
        params = fhn.FhnParams(
            a=float(sys_cfg.get("a", 0.0)),
            b=float(sys_cfg.get("b", 0.0)),
            c=float(sys_cfg["c"]),
            R=np.asarray(sys_cfg["R"], dtype=float),
        )
        system = fhn.feedback_system(params, domain)
        constants = fhn.fhn_gain_constants(params, config.get("p", 2))
        resolved = {"kind": "fhn", "a": params.a, "b": params.b, "c": params.c, "R": params.R, "N": params.N}
        return system, constants, resolved
    if kind == "polynomial":
        n, m = int(sys_cfg["n"]), int(sys_cfg["m"])
        f_terms = [[(t["coef"], t["powers"]) for t in comp] for comp in sys_cfg["f"]]
        g_terms = [[(t["coef"], t["powers"]) for t in comp] for comp in sys_cfg["g"]]
        system = certify.polynomial_system(n, m, f_terms, g_terms, domain)
        return system, None, {"kind": "polynomial", "n": n, "m": m, "f": sys_cfg["f"], "g": sys_cfg["g"]}
    raise CliError(f"unknown system kind {kind!r}; use 'fhn' or 'polynomial'")


def _cmd_certify_feedback(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise dense.MatrixFormatError(
                f"{args.config}:{exc.lineno}:{exc.colno}: {exc.msg}"
            ) from exc
    system, constants, resolved_system = _build_system(config)
    p = args.p if args.p is not None else config.get("p", 2)
    sampler = certify.Sampler(kind="grid" if args.grid else "random", count=args.samples, seed=args.seed)
    report = certify.theorem1_certify(system, p=p, sampler=sampler, constants=constants)
    resolved = {
        "system": resolved_system,
        "domain": None
        if system.domain is None
        else {"lower": system.domain.lower, "upper": system.domain.upper},
        "p": p,
        "samples": args.samples,
        "sampler": sampler.kind,
    }
    payload = report.to_dict()
    print(json.dumps(_jsonable({"verdict": report.verdict, "eta": report.eta}), sort_keys=True))
    _write_report(args.report, payload, resolved, seed=args.seed)
    return 0 if report.certified else 2


def _fhn_params_from_args(args) -> fhn.FhnParams:
    return fhn.FhnParams(a=args.a, b=args.b, c=args.c, R=dense.load_matrix(args.R))


def _cmd_fhn_certify(args) -> int:
    params = _fhn_params_from_args(args)
    if args.diffusive:
        report = fhn.diffusive_check(params)
    else:
        report = fhn.corollary_net_check(params, args.p)
    baseline = certify.smallgain_1contraction(fhn.fhn_gain_constants(params, args.p))
    payload = report.to_dict()
    payload["one_contraction_baseline"] = baseline.to_dict()
    config = {
        "a": params.a,
        "b": params.b,
        "c": params.c,
        "R": params.R,
        "p": measures.norm_order(args.p) if not args.diffusive else 2,
        "diffusive": args.diffusive,
    }
    print(json.dumps(_jsonable({"verdict": report.verdict}), sort_keys=True))
    _write_report(args.report, payload, config)
    return 0 if report.certified else 2


def _cmd_fhn_simulate(args) -> int:
    params = _fhn_params_from_args(args)
    x0 = _parse_vector(args.x0, "--x0")
    z0 = _parse_vector(args.z0, "--z0")
    traj = fhn.simulate(params, x0, z0, args.h, args.T)
    n = params.N
    labels = [f"v{i + 1}" for i in range(n)] + [f"w{i + 1}" for i in range(n)]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("t," + ",".join(labels) + "\n")
            for t, row in zip(traj.times, traj.states):
                fh.write(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row) + "\n")
    if args.plot:
        with open(args.plot, "w", encoding="utf-8") as fh:
            fh.write(_svg_timeseries(traj.times, traj.states, labels))
    summary = {
        "terminal_field_norm": traj.terminal_field_norm,
        "terminal_state": traj.terminal_state,
        "steps": len(traj.times) - 1,
    }
    print(json.dumps(_jsonable(summary), sort_keys=True))
    _write_report(
        args.report,
        summary,
        {
            "a": params.a,
            "b": params.b,
            "c": params.c,
            "R": params.R,
            "x0": x0,
            "z0": z0,
            "h": args.h,
            "T": args.T,
        },
    )
    return 0


def _cmd_selftest(_args) -> int:
    failures = selftest_mod.run()
    return 1 if failures else 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="kontract", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compound", help="multiplicative or additive compound of a matrix")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=("mult", "add"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_compound)

    p = sub.add_parser("kron", help="Kronecker products, sums, commutation and bridge matrices")
    p.add_argument("--op", choices=("product", "sum", "commutation", "bridge"), required=True)
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.add_argument("--out-l", dest="out_l")
    p.add_argument("--out-m", dest="out_m")
    p.set_defaults(fn=_cmd_kron)

    p = sub.add_parser("block2", help="blockwise 2-compound formulas and the 2-positivity test")
    p.add_argument("--mode", choices=("mult", "add", "positivity"), required=True)
    for name in "ABCD":
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_block2)

    p = sub.add_parser("measure", help="matrix measure, optionally in a scaled norm")
    p.add_argument("--p", required=True)
    p.add_argument("--scale")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_measure)

    p = sub.add_parser("metzler", help="cycle-gain Hurwitz test for Metzler matrices")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--order", help="comma-separated node permutation applied first")
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_metzler)

    p = sub.add_parser("certify-feedback", help="sample the 2-contraction certificate over a box")
    p.add_argument("--config", required=True)
    p.add_argument("--p")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--grid", action="store_true", help="use a grid sampler instead of stratified random")
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_certify_feedback)

    p = sub.add_parser("fhn", help="FitzHugh-Nagumo network tools")
    fsub = p.add_subparsers(dest="fhn_command", required=True)

    pc = fsub.add_parser("certify", help="closed-form network 2-contraction conditions")
    pc.add_argument("--a", type=float, default=0.0)
    pc.add_argument("--b", type=float, default=0.0)
    pc.add_argument("--c", type=float, required=True)
    pc.add_argument("--R", required=True)
    pc.add_argument("--p", default="2")
    pc.add_argument("--diffusive", action="store_true", help="use the Laplacian-coupling conditions")
    pc.add_argument("--report")
    pc.set_defaults(fn=_cmd_fhn_certify)

    ps = fsub.add_parser("simulate", help="fixed-step RK4 simulation")
    ps.add_argument("--a", type=float, default=0.0)
    ps.add_argument("--b", type=float, default=0.0)
    ps.add_argument("--c", type=float, required=True)
    ps.add_argument("--R", required=True)
    ps.add_argument("--x0", required=True)
    ps.add_argument("--z0", required=True)
    ps.add_argument("--h", type=float, default=1e-3)
    ps.add_argument("--T", type=float, required=True)
    ps.add_argument("--out")
    ps.add_argument("--plot")
    ps.add_argument("--report")
    ps.set_defaults(fn=_cmd_fhn_simulate)

    p = sub.add_parser("selftest", help="run the built-in property suite")
    p.set_defaults(fn=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary: everything maps to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
