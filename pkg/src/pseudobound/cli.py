"""Command-line front end.

Subcommands: state | ppt | witness (eval|optimize) | prepare |
tomo (simulate|reconstruct) | metrics | report | verify.

Matrices travel as JSON objects {"dim": n, "re": [[...]], "im": [[...]]};
datasets as JSON arrays of measurement records.  Exit codes: 0 all good,
1 entanglement not detected, 2 invariant violation or bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import core, nmr, states, tomography
from . import witnesses

REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_NOT_DETECTED = 1
EXIT_INVARIANT = 2


@dataclass
class RunConfig:
    """Defaults are the working point of the whole pipeline."""

    a: float = 0.3460
    epsilon: float = 0.1069
    p: float = 8.4e-5 / 3.61
    sigma: float = 0.010          # measurement noise relative to the deviation
    noise_lambda: float = 0.16    # depolarization of the embedded state
    seed: int = 0


def _write_json(payload, path: str | None) -> None:
    text = json.dumps(payload, indent=1, sort_keys=False)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_matrix(path: str) -> np.ndarray:
    with open(path) as fh:
        return core.matrix_from_json(json.load(fh))


def _load_density(path: str, tolerance: float = 1e-6) -> core.DensityOperator:
    return core.DensityOperator.loose(_load_matrix(path), tolerance=tolerance)


def _params_from_args(args) -> states.StateParams:
    if args.a1 is not None or args.a2 is not None or args.a3 is not None:
        missing = [n for n, v in (("--a1", args.a1), ("--a2", args.a2), ("--a3", args.a3))
                   if v is None]
        if missing:
            raise ValueError(f"give all of --a1/--a2/--a3 (missing {missing})")
        return states.StateParams(args.a1, args.a2, args.a3)
    return states.StateParams.symmetric(args.a)


# ---------------------------------------------------------------------------
# subcommands


def cmd_state(args) -> int:
    params = _params_from_args(args)
    rho = states.bound_entangled_state(params)
    if args.p is not None:
        rho = states.pseudo_state(rho, args.p).rho
    payload = core.matrix_to_json(rho.matrix)
    payload["meta"] = {
        "a1": params.a1, "a2": params.a2, "a3": params.a3,
        "entangled_regime": params.entangled_regime,
        "pseudo_fraction": args.p,
    }
    _write_json(payload, args.out)
    return EXIT_OK


def cmd_ppt(args) -> int:
    rho = _load_density(args.state)
    report = core.is_ppt(rho, tolerance=args.tolerance)
    _write_json({"tolerance": report.tolerance, "cuts": report.as_dict(),
                 "all_ppt": report.all_ppt}, args.out)
    return EXIT_OK if report.all_ppt else EXIT_NOT_DETECTED


def cmd_witness_eval(args) -> int:
    params = witnesses.WitnessParams(
        *(_params_from_args(args).as_tuple()), epsilon=args.eps)
    w = witnesses.witness(params)
    rho = _load_density(args.state)
    value = witnesses.expectation(w, rho)
    lo, hi = witnesses.witness_spectrum_extremes(params)
    _write_json({
        "expectation": value,
        "detected": value < 0,
        "witness_trace": float(np.real(np.trace(w))),
        "spectrum": {"min": lo, "max": hi},
    }, args.out)
    return EXIT_OK if value < 0 else EXIT_NOT_DETECTED


def cmd_witness_optimize(args) -> int:
    lo, _, hi = args.range.partition(":")
    report = witnesses.optimize_parameters(
        search_range=(float(lo), float(hi)),
        restarts=args.restarts, seed=args.seed)
    _write_json(report.as_dict(), args.out)
    return EXIT_OK


def cmd_prepare(args) -> int:
    params = states.StateParams.symmetric(args.a)
    kappa = args.kappa
    p = args.p if args.p is not None else nmr.matched_fraction(params, kappa)
    seed = nmr.target_diagonal(params, p)
    five = nmr.initial_states(nmr.DEFAULT_SYSTEM, kappa, a=args.a)
    sol = nmr.solve_temporal_weights(five, seed)
    ps = nmr.prepare_pseudo_state(params, p)
    payload = {
        "pseudo_state": core.matrix_to_json(ps.rho.matrix),
        "p": p,
        "kappa": kappa,
        "diagonal_seed": {
            "populations": np.real(np.diag(seed.state.matrix)).tolist(),
            "single_spin": list(seed.single_spin),
            "two_spin": list(seed.two_spin),
            "three_spin": seed.three_spin,
        },
        "temporal_weights": {
            "weights": sol.weights.tolist(),
            "residual": sol.residual,
            "achieved_p": sol.achieved_p,
        },
        "preparation_unitary": core.matrix_to_json(nmr.preparation_unitary()),
    }
    _write_json(payload, args.out)
    return EXIT_OK


def cmd_tomo_simulate(args) -> int:
    rho = _load_density(args.state)
    dataset = tomography.generate_dataset(rho, sigma=args.sigma, seed=args.seed)
    _write_json(dataset.to_json(), args.out)
    return EXIT_OK


def cmd_tomo_reconstruct(args) -> int:
    with open(args.data) as fh:
        dataset = tomography.TomographyDataset.from_json(json.load(fh))
    result = tomography.reconstruct(dataset)
    rho = result.rho_hat
    if args.project:
        rho = tomography.project_to_physical(rho)
    payload = core.matrix_to_json(rho.matrix)
    payload["meta"] = {
        "residual_norm": result.residual_norm,
        "projected": bool(args.project),
        "min_eigenvalue": float(result.rho_hat.eigenvalues()[0]),
    }
    _write_json(payload, args.out)
    return EXIT_OK


def cmd_metrics(args) -> int:
    rho = _load_density(args.state)
    ref = _load_density(args.reference)
    _write_json({
        "uhlmann_fidelity": core.uhlmann_fidelity(ref, rho),
        "trace_distance": core.trace_distance(ref, rho),
    }, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# report: the full pipeline


def build_report(cfg: RunConfig) -> dict:
    """prepare -> noise -> simulate -> reconstruct -> peel -> certify."""
    if cfg.p <= 0:
        raise ValueError(
            "p must be positive: the peel step divides the reconstructed "
            "deviation by p and is undefined at p = 0")
    params = states.StateParams.symmetric(cfg.a)
    wparams = witnesses.WitnessParams.symmetric(cfg.a, cfg.epsilon)
    rho_ideal = states.bound_entangled_state(params)
    w = witnesses.witness(wparams)

    embedded = nmr.depolarize(rho_ideal, cfg.noise_lambda)
    ps = states.pseudo_state(embedded, cfg.p)

    # measurement noise is quoted relative to the deviation amplitude, so
    # the absolute record sigma scales with p
    sigma_abs = cfg.sigma * cfg.p
    dataset = tomography.generate_dataset(ps.rho, sigma=sigma_abs, seed=cfg.seed)
    result = tomography.reconstruct(dataset)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        peeled = states.peel_matrix(result.rho_hat.matrix, cfg.p)

    ppt = core.is_ppt(peeled, tolerance=1e-6)
    wexp = witnesses.expectation(w, peeled)
    werr = tomography.propagate_witness_error(
        result, witnesses.pseudo_witness(w, cfg.p))
    fid = core.uhlmann_fidelity(rho_ideal, peeled)
    dist = core.trace_distance(rho_ideal, peeled)

    trw8 = float(np.real(np.trace(w))) / 8.0
    modeled_wexp = (1 - cfg.noise_lambda) * (-cfg.epsilon) + cfg.noise_lambda * trw8
    imag_max = float(np.max(np.abs(np.imag(peeled.matrix))))

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": {
            "a": cfg.a, "epsilon": cfg.epsilon, "p": cfg.p,
            "sigma": cfg.sigma, "noise_lambda": cfg.noise_lambda,
            "seed": cfg.seed,
        },
        "ppt": {"cuts": ppt.as_dict(), "all_ppt": ppt.all_ppt},
        "witness": {
            "expectation": wexp,
            "sigma": werr,
            "detected": wexp < 0,
            "ideal_expectation": -cfg.epsilon,
            "modeled_expectation": modeled_wexp,
        },
        "metrics": {
            "uhlmann_fidelity": fid,
            "trace_distance": dist,
            "max_imaginary_element": imag_max,
        },
        "reconstruction": {
            "residual_norm": result.residual_norm,
            "min_eigenvalue_peeled": float(peeled.eigenvalues()[0]),
        },
        "entangled": bool(ppt.all_ppt and wexp < 0),
    }


def _report_summary(rep: dict) -> str:
    w = rep["witness"]
    m = rep["metrics"]
    cuts = rep["ppt"]["cuts"]
    lines = [
        "pseudo bound entanglement report",
        f"  PPT cuts: " + ", ".join(
            f"{label} min_eig={c['min_eigenvalue']:+.4f} {'PPT' if c['ppt'] else 'NPT'}"
            for label, c in cuts.items()),
        f"  <W> = {w['expectation']:+.4f} +/- {w['sigma']:.4f}"
        f"  (ideal {w['ideal_expectation']:+.4f}, modeled {w['modeled_expectation']:+.4f})",
        f"  Uhlmann fidelity to ideal = {m['uhlmann_fidelity']:.4f}",
        f"  trace distance to ideal  = {m['trace_distance']:.4f}",
        f"  entangled: {'yes' if rep['entangled'] else 'NO'}",
    ]
    return "\n".join(lines)


def cmd_report(args) -> int:
    cfg = RunConfig(a=args.a, epsilon=args.eps, p=args.p, sigma=args.sigma,
                    noise_lambda=args.noise_lambda, seed=args.seed)
    try:
        rep = build_report(cfg)
    except ValueError as exc:
        print(f"report failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    print(_report_summary(rep))
    if args.out:
        _write_json(rep, args.out)
    return EXIT_OK if rep["entangled"] else EXIT_NOT_DETECTED


# ---------------------------------------------------------------------------
# verify: the invariant suite


def _check_family_ppt(rng):
    for _ in range(30):
        params = states.StateParams(*rng.uniform(0.1, 3.0, size=3))
        if not core.is_ppt(states.bound_entangled_state(params)).all_ppt:
            return False, f"NPT at {params.as_tuple()}"
    return True, "30 random triples PPT on all cuts"


def _check_witness_zero_trace(rng):
    worst = 0.0
    for _ in range(100):
        params = states.StateParams(*rng.uniform(0.1, 3.0, size=3))
        val = witnesses.expectation(witnesses.witness_bar(params),
                                    states.bound_entangled_state(params))
        worst = max(worst, abs(val))
    return worst <= 1e-12, f"max |tr(Wbar rho)| = {worst:.2e}"


def _check_witness_spectrum(rng):
    a, eps = 0.3460, 0.1069
    lo, hi = witnesses.witness_spectrum_extremes(
        witnesses.WitnessParams.symmetric(a, eps))
    expect_lo = -3 * a / (1 + a * a) - eps
    ok = abs(lo - expect_lo) < 1e-10 and -1.040 < lo < -1.028 and 1.815 < hi < 1.825
    return ok, f"spectrum [{lo:.4f}, {hi:.4f}]"


def _check_pseudo_witness(rng):
    for _ in range(20):
        rho = core.random_density_operator(rng)
        p = float(rng.uniform(1e-6, 1.0))
        wmat = witnesses.witness_bar(states.StateParams(*rng.uniform(0.1, 3.0, 3)))
        lhs = witnesses.expectation(witnesses.pseudo_witness(wmat, p),
                                    states.pseudo_state(rho, p).rho)
        rhs = witnesses.expectation(wmat, rho)
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
            return False, f"identity off by {abs(lhs - rhs):.2e} at p={p:.2e}"
    return True, "20 random (state, p) pairs"


def _check_peel_round_trip(rng):
    worst = 0.0
    for _ in range(20):
        rho = core.random_density_operator(rng)
        p = float(rng.uniform(1e-6, 1.0))
        peeled = states.peel_identity(states.pseudo_state(rho, p))
        worst = max(worst, float(np.max(np.abs(peeled.matrix - rho.matrix))))
    return worst <= 1e-9, f"max round-trip error {worst:.2e}"


def _check_rank(rng):
    r = core.numeric_rank(states.bound_entangled_state(
        states.StateParams.symmetric(0.3460)).matrix)
    return r == 7, f"numeric rank {r}"


def _check_preparation(rng):
    u = nmr.preparation_unitary()
    unitary = float(np.max(np.abs(u @ u.conj().T - np.eye(8))))
    v_sel, v_cnot = nmr.factor_preparation()
    product = float(np.max(np.abs(v_cnot @ v_sel - u)))
    mods = np.abs(v_cnot)
    perm = bool(np.all(np.isclose(mods, 0.0, atol=1e-14) | np.isclose(mods, 1.0, atol=1e-14)))
    ok = unitary < 1e-14 and product < 1e-14 and perm
    return ok, f"unitarity {unitary:.1e}, factorization {product:.1e}, population-permutation {perm}"


def _check_weld(rng):
    params = states.StateParams.symmetric(0.3460)
    kappa = 8.4e-5
    p = nmr.matched_fraction(params, kappa)
    five = nmr.initial_states(nmr.DEFAULT_SYSTEM, kappa)
    sol = nmr.solve_temporal_weights(five, nmr.target_diagonal(params, p))
    rho_d = nmr.mix_states(five, sol.weights)
    u = nmr.preparation_unitary()
    lhs = u @ rho_d.matrix @ u.conj().T
    rhs = states.pseudo_state(states.bound_entangled_state(params), sol.achieved_p).rho.matrix
    gap = float(np.max(np.abs(lhs - rhs)))
    ok = sol.residual <= 1e-10 and gap <= 1e-12
    return ok, f"weights residual {sol.residual:.1e}, weld gap {gap:.1e}"


def _check_separable_boundary(rng):
    params = states.StateParams(1.0, 1.0, 1.0)
    rho = states.bound_entangled_state(params)
    eps = witnesses.certified_epsilon(1.0, restarts=100, seed=11)
    detected = witnesses.expectation(
        witnesses.witness_bar(params) - eps * np.eye(8), rho) < -1e-9
    ok = (not params.entangled_regime) and (not detected) \
        and core.is_ppt(rho).all_ppt and abs(eps) < 1e-6
    return ok, f"flag {params.entangled_regime}, eps {eps:.2e}, detected {detected}"


def _check_design_rank(rng):
    dm = tomography.design_matrix()
    return dm.rank == 63, f"rank {dm.rank} ({dm.matrix.shape[0]} rows)"


def _check_round_trip(rng):
    worst = 0.0
    for _ in range(5):
        rho = core.random_density_operator(rng)
        rec = tomography.reconstruct(tomography.generate_dataset(rho, sigma=0.0))
        worst = max(worst, core.trace_distance(rec.rho_hat, rho))
    return worst <= 1e-8, f"worst trace distance {worst:.2e}"


def _check_error_propagation(rng):
    rho = states.bound_entangled_state(states.StateParams.symmetric(0.3460))
    rec = tomography.reconstruct(tomography.generate_dataset(rho, sigma=1e-3, seed=3))
    w = witnesses.witness(witnesses.WitnessParams.symmetric(0.3460, 0.1069))
    s_w = tomography.propagate_witness_error(rec, w)
    s_id = tomography.propagate_witness_error(rec, np.eye(8))
    s_shift = tomography.propagate_witness_error(rec, w + 3.7 * np.eye(8))
    s_scaled = tomography.propagate_witness_error(rec, 2.0 * w)
    ok = s_id == 0.0 and abs(s_shift - s_w) < 1e-12 and abs(s_scaled - 2 * s_w) < 1e-12
    return ok, f"sigma_W {s_w:.2e}, identity {s_id:.1e}"


def _check_metric_sandwich(rng):
    for _ in range(100):
        r1 = core.random_density_operator(rng)
        r2 = core.random_density_operator(rng)
        f = core.uhlmann_fidelity(r1, r2)
        dt = core.trace_distance(r1, r2)
        if not (1 - f <= dt + 1e-10 and dt <= np.sqrt(max(0.0, 1 - f * f)) + 1e-10):
            return False, f"violated at F={f:.4f}, dt={dt:.4f}"
    return True, "100 random pairs inside the bounds"


def _check_projector_spectrum(rng):
    v = core.random_unitary(rng)[:, :3]
    proj = v @ v.conj().T
    vals = core.eigvalsh(proj)
    ok = bool(np.all((np.abs(vals) < 1e-9) | (np.abs(vals - 1) < 1e-9)))
    return ok, "projector eigenvalues in {0, 1}"


VERIFY_CHECKS = [
    ("state family PPT", _check_family_ppt),
    ("witness zero-trace identity", _check_witness_zero_trace),
    ("witness spectrum", _check_witness_spectrum),
    ("pseudo witness identity", _check_pseudo_witness),
    ("pseudo state peel round trip", _check_peel_round_trip),
    ("state family rank", _check_rank),
    ("preparation unitary and factorization", _check_preparation),
    ("temporal averaging weld", _check_weld),
    ("separable boundary behaviour", _check_separable_boundary),
    ("tomography design rank", _check_design_rank),
    ("tomography round trip", _check_round_trip),
    ("witness error propagation", _check_error_propagation),
    ("fidelity/trace-distance sandwich", _check_metric_sandwich),
    ("projector spectrum", _check_projector_spectrum),
]


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = 0
    for name, check in VERIFY_CHECKS:
        try:
            ok, detail = check(rng)
        except Exception as exc:   # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"[{status}] {name}: {detail}")
    print(f"{len(VERIFY_CHECKS) - failures}/{len(VERIFY_CHECKS)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_INVARIANT


# ---------------------------------------------------------------------------


def _add_params(parser, with_eps=False):
    parser.add_argument("--a", type=float, default=0.3460,
                        help="symmetric family parameter")
    parser.add_argument("--a1", type=float, default=None)
    parser.add_argument("--a2", type=float, default=None)
    parser.add_argument("--a3", type=float, default=None)
    if with_eps:
        parser.add_argument("--eps", type=float, default=0.1069)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudobound",
        description="pseudo bound entanglement toolkit (three-qubit register)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="emit a family state (optionally embedded)")
    _add_params(p)
    p.add_argument("--p", type=float, default=None, help="pseudo-state fraction")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("ppt", help="PPT verdict for every bipartite cut")
    p.add_argument("--state", required=True)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ppt)

    p = sub.add_parser("witness", help="witness evaluation and optimization")
    wsub = p.add_subparsers(dest="witness_command", required=True)
    pe = wsub.add_parser("eval", help="evaluate <W> on a state")
    _add_params(pe, with_eps=True)
    pe.add_argument("--state", required=True)
    pe.add_argument("--out", default=None)
    pe.set_defaults(func=cmd_witness_eval)
    po = wsub.add_parser("optimize", help="optimize the symmetric parameter")
    po.add_argument("--range", default="0.05:1.0")
    po.add_argument("--restarts", type=int, default=250)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--out", default=None)
    po.set_defaults(func=cmd_witness_optimize)

    p = sub.add_parser("prepare", help="temporal averaging + gate sequence")
    p.add_argument("--a", type=float, default=0.3460)
    p.add_argument("--p", type=float, default=None,
                   help="pseudo fraction (default: exactly synthesizable)")
    p.add_argument("--kappa", type=float, default=nmr.DEFAULT_KAPPA_H)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("tomo", help="simulate or invert readout data")
    tsub = p.add_subparsers(dest="tomo_command", required=True)
    ts = tsub.add_parser("simulate")
    ts.add_argument("--state", required=True)
    ts.add_argument("--sigma", type=float, default=1e-3)
    ts.add_argument("--seed", type=int, default=7)
    ts.add_argument("--out", default=None)
    ts.set_defaults(func=cmd_tomo_simulate)
    tr = tsub.add_parser("reconstruct")
    tr.add_argument("--data", required=True)
    tr.add_argument("--project", action="store_true",
                    help="project onto physical states afterwards")
    tr.add_argument("--out", default=None)
    tr.set_defaults(func=cmd_tomo_reconstruct)

    p = sub.add_parser("metrics", help="fidelity and trace distance")
    p.add_argument("--state", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("report", help="full pipeline with certification summary")
    p.add_argument("--a", type=float, default=0.3460)
    p.add_argument("--eps", type=float, default=0.1069)
    p.add_argument("--p", type=float, default=8.4e-5 / 3.61)
    p.add_argument("--sigma", type=float, default=0.010,
                   help="measurement noise relative to the deviation scale")
    p.add_argument("--noise-lambda", type=float, default=0.16,
                   help="depolarization applied to the embedded state")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
