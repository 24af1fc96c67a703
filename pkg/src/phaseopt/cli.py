"""Command-line front end.

Subcommands generate phase matrices, run verdict checks, export densities
and norm sweeps, and drive the finite-group scenario runner.  All JSON
output is byte-deterministic (fixed field order, 17-digit floats); phase
matrices travel between subcommands through the JSON schema on
stdin/stdout so checks compose as shell pipes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import groupsim as gs
from ._serialize import density_csv, dumps, sweep_csv
from .config import Config, load_config
from .measure import (
    Arc,
    CoherentVector,
    DensityMatrix,
    DiagonalState,
    density,
    effect_norm,
    effect_operator,
    et_quadrature_oracle,
)
from .optimal import (
    CircleMeasure,
    CriterionInapplicableError,
    NotStateGeneratedError,
    approx_sharp_check,
    canonical_channel,
    extremal_check,
    post_equiv_class,
    preclean_check,
    real_nonextremal_shortcut,
    recover_state,
    smear,
)
from .phase_matrix import (
    PhaseMatrix,
    canonical,
    chessboard,
    example4,
    example5,
    from_eta,
    gram_factor,
    state_generated,
    u_equivalent,
    validate,
)

__all__ = ["main", "run", "CliError"]


class CliError(Exception):
    """Bad input surfaced as a diagnostic and exit code 1."""


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _load_json(path: str) -> dict:
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc})")


def _load_matrix(path: str) -> PhaseMatrix:
    data = _load_json(path)
    for field in ("dim", "entries"):
        if field not in data:
            raise CliError(f"{path}: missing field {field!r}")
    try:
        return PhaseMatrix.from_dict(data)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}")


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _parse_levels(spec: str) -> np.ndarray:
    """Parse 'w@level,w@level' into a weight vector."""
    pairs = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if "@" not in chunk:
            raise CliError(f"level spec {chunk!r} is not 'weight@level'")
        w, lvl = chunk.split("@", 1)
        pairs.append((float(w), int(lvl)))
    size = max(lvl for _, lvl in pairs) + 1
    weights = np.zeros(size)
    for w, lvl in pairs:
        weights[lvl] += w
    return weights


def _parse_arc(spec: str) -> Arc:
    named = {
        "full": Arc.full(),
        "half": Arc.half(),
        "quarter": Arc.interval(0.0, np.pi / 2),
    }
    if spec in named:
        return named[spec]
    comps = []
    for chunk in spec.split(","):
        if ":" not in chunk:
            raise CliError(f"arc component {chunk!r} is not 'start:length'")
        a, b = chunk.split(":", 1)
        comps.append((float(a), float(b)))
    return Arc(tuple(comps))


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise CliError(f"cannot parse complex number {text!r}")


def _report(args, data: dict, failed: bool) -> int:
    _emit(dumps(data), args.out)
    return 2 if (failed and args.assert_) else 0


# --- subcommand handlers ------------------------------------------------------


def _cmd_gen(args, cfg: Config) -> int:
    dim = args.dim or cfg.dim
    if args.family == "canonical":
        m = canonical(dim)
    elif args.family == "chessboard":
        m = chessboard(_parse_complex(args.xi), dim)
    elif args.family == "state":
        m = state_generated(_parse_levels(args.levels), dim)
    elif args.family == "eta":
        data = _load_json(args.infile)
        vecs = np.array(
            [[complex(re, im) for re, im in row] for row in data["vectors"]]
        )
        m = from_eta(vecs)
    elif args.family == "example4":
        m = example4(args.n0, dim)
    else:
        m = example5(dim)
    _emit(dumps(m.to_dict()), args.out)
    return 0


def _cmd_validate(args, cfg: Config) -> int:
    data = _load_json(args.infile)
    dim = int(data["dim"])
    arr = np.array([complex(re, im) for re, im in data["entries"]]).reshape(dim, dim)
    report = validate(arr, cfg.eps_psd)
    out = report.to_dict()
    out["tolerances"] = {"eps_psd": cfg.eps_psd}
    return _report(args, out, not report.ok)


def _cmd_density(args, cfg: Config) -> int:
    m = _load_matrix(args.infile)
    if args.coherent is not None:
        rho = CoherentVector(_parse_complex(args.coherent), m.dim).density_matrix()
    elif args.state_file is not None:
        rho = DensityMatrix.from_dict(_load_json(args.state_file))
    else:
        raise CliError("density needs --coherent or --state-file")
    thetas, values = density(m, rho, args.grid or cfg.grid)
    _emit(density_csv(thetas, values), args.out)
    return 0


def _cmd_norm_sweep(args, cfg: Config) -> int:
    arc = _parse_arc(args.arc)
    dims = [int(d) for d in args.dims.split(",")]
    rows = []
    for d in dims:
        if args.family == "canonical":
            m = canonical(d)
        elif args.family == "state":
            m = state_generated(_parse_levels(args.levels), d)
        else:
            raise CliError(f"unsupported sweep family {args.family!r}")
        rows.append((d, effect_norm(m, arc)))
    _emit(sweep_csv(rows), args.out)
    return 0


def _cmd_check(args, cfg: Config) -> int:
    m = _load_matrix(args.infile)
    if args.criterion == "sharp":
        rep = approx_sharp_check(m, tol=args.tol or cfg.tol_sharp)
        data = rep.to_dict()
        return _report(args, data, not rep.consistent)
    if args.criterion == "extremal":
        eta = gram_factor(m, cfg.eps_rank)
        rep = extremal_check(eta)
        data = rep.to_dict()
        data["tolerances"] = {"eps_rank": cfg.eps_rank}
        cert = real_nonextremal_shortcut(m)
        data["real_certificate"] = (
            None
            if cert is None
            else {"pair": list(cert.pair), "max_residual": cert.max_residual}
        )
        return _report(args, data, not rep.extremal)
    if args.criterion == "rank":
        eta = gram_factor(m, cfg.eps_rank)
        return _report(
            args,
            {"rank": eta.rank, "dim": m.dim, "eps_rank": cfg.eps_rank},
            False,
        )
    if args.criterion == "preclean":
        n0 = preclean_check(m, tol=args.tol or 1e-6)
        data = {
            "verdict": "positive" if n0 is not None else "negative",
            "n0": n0,
            "dim": m.dim,
            "tolerances": {"tail_modulus": args.tol or 1e-6},
        }
        return _report(args, data, n0 is None)
    other = _load_matrix(args.other) if args.other else None
    if other is None:
        raise CliError(f"check {args.criterion} requires --other")
    if args.criterion == "postclass":
        try:
            x = post_equiv_class(m, other, tol=args.tol or cfg.tol_equiv)
        except CriterionInapplicableError as exc:
            return _report(
                args,
                {"verdict": "inapplicable", "reason": str(exc), "dim": m.dim},
                True,
            )
        data = {
            "verdict": "equivalent" if x is not None else "not-equivalent",
            "x": None if x is None else [x.real, x.imag],
            "dim": m.dim,
            "tolerances": {"tol": args.tol or cfg.tol_equiv},
        }
        return _report(args, data, x is None)
    if args.criterion == "uequiv":
        lam = u_equivalent(m, other, tol=args.tol or cfg.tol_equiv)
        data = {
            "verdict": "equivalent" if lam is not None else "not-equivalent",
            "lambda": None if lam is None else [[z.real, z.imag] for z in lam],
            "dim": m.dim,
            "tolerances": {"tol": args.tol or cfg.tol_equiv},
        }
        return _report(args, data, lam is None)
    raise CliError(f"unknown criterion {args.criterion!r}")


def _cmd_smear(args, cfg: Config) -> int:
    m = _load_matrix(args.infile)
    nu = CircleMeasure.from_dict(_load_json(args.nu))
    _emit(dumps(smear(m, nu).to_dict()), args.out)
    return 0


def _cmd_channel_identity(args, cfg: Config) -> int:
    m = _load_matrix(args.infile)
    rng = np.random.default_rng(args.seed)
    chan = canonical_channel(m)
    can = canonical(m.dim)
    worst = 0.0
    for _ in range(args.trials):
        g = rng.normal(size=(m.dim, m.dim)) + 1j * rng.normal(size=(m.dim, m.dim))
        rho_arr = g @ g.conj().T
        rho_arr /= rho_arr.trace()
        rho = DensityMatrix(rho_arr)
        _, d1 = density(m, rho, args.grid or cfg.grid)
        _, d2 = density(can, DensityMatrix(chan(rho.entries)), args.grid or cfg.grid)
        worst = max(worst, float(np.abs(d1 - d2).max()))
    data = {
        "verdict": "pass" if worst < args.tol else "fail",
        "max_deviation": worst,
        "trials": args.trials,
        "dim": m.dim,
        "tolerances": {"tol": args.tol},
    }
    return _report(args, data, worst >= args.tol)


def _cmd_recover_state(args, cfg: Config) -> int:
    m = _load_matrix(args.infile)
    depth = args.depth if args.depth is not None else cfg.depth_for(m.dim)
    try:
        state = recover_state(m, depth=depth)
    except NotStateGeneratedError as exc:
        return _report(
            args,
            {"verdict": "not-state-generated", "reason": str(exc), "dim": m.dim},
            True,
        )
    data = {
        "verdict": "ok",
        "weights": [float(w) for w in state.weights],
        "depth": depth,
        "dim": m.dim,
    }
    return _report(args, data, False)


def _cmd_oracle_et(args, cfg: Config) -> int:
    state = DiagonalState(_parse_levels(args.levels))
    arc = _parse_arc(args.arc)
    dim = args.dim or 12
    approx = et_quadrature_oracle(
        state, arc, dim, r_max=args.r_max, quad_points=args.quad_points
    )
    exact = effect_operator(state_generated(state.weights, dim), arc)
    dev = float(np.abs(approx - exact).max())
    data = {
        "verdict": "pass" if dev < args.tol else "fail",
        "max_entry_deviation": dev,
        "dim": dim,
        "r_max": args.r_max,
        "quad_points": args.quad_points,
        "tolerances": {"tol": args.tol},
    }
    return _report(args, data, dev >= args.tol)


def _scenario_matrix(raw, dim: int) -> np.ndarray:
    arr = np.zeros((dim, dim), dtype=np.complex128)
    for i, row in enumerate(raw):
        for j, cell in enumerate(row):
            arr[i, j] = complex(cell[0], cell[1]) if isinstance(cell, list) else cell
    return arr


def _cmd_groupsim(args, cfg: Config) -> int:
    scn = _load_json(args.scenario)
    rep = gs.CyclicRep(int(scn["N"]), tuple(scn["weights"]))
    seed = _scenario_matrix(scn["seed"], rep.dim)
    obs = gs.make_covariant(rep, seed)
    nu = gs.FiniteMeasure(tuple(scn.get("nu", [1.0] + [0.0] * (rep.order - 1))))
    results = {}
    failed = False
    rng = np.random.default_rng(scn.get("rng_seed", 7))
    for name in scn.get("checks", []):
        try:
            results[name] = _run_groupsim_check(name, rep, obs, nu, scn, rng)
        except (AssertionError, ValueError) as exc:
            results[name] = {"verdict": "fail", "reason": str(exc)}
            failed = True
    data = {"N": rep.order, "dim": rep.dim, "checks": results}
    return _report(args, data, failed)


def _run_groupsim_check(name, rep, obs, nu, scn, rng) -> dict:
    n = rep.order
    if name == "covariance":
        worst = 0.0
        for g in range(n):
            u = rep.unitary(g)
            for x in range(n):
                lhs = u @ obs.effect(x) @ u.conj().T
                worst = max(worst, float(np.abs(lhs - obs.effect((g + x) % n)).max()))
        assert worst < 1e-12, f"covariance residual {worst}"
        return {"verdict": "pass", "residual": worst}
    if name == "additivity":
        total = obs.effect_set(range(n))
        dev = float(np.abs(total - np.eye(rep.dim)).max())
        assert dev < 1e-10, f"additivity residual {dev}"
        return {"verdict": "pass", "residual": dev}
    if name == "faithful":
        worst = min(
            float(np.abs(obs.effect(x)).max()) for x in range(n)
        )
        assert worst > 1e-12, "some singleton effect vanishes"
        return {"verdict": "pass", "min_effect_weight": worst}
    if name == "smear-covariance":
        sm = gs.smear_finite(obs, nu)
        worst = 0.0
        for g in range(n):
            u = rep.unitary(g)
            for x in range(n):
                lhs = u @ sm.effect(x) @ u.conj().T
                worst = max(worst, float(np.abs(lhs - sm.effect((g + x) % n)).max()))
        assert worst < 1e-12, f"smeared covariance residual {worst}"
        return {"verdict": "pass", "residual": worst}
    if name == "norm-bound":
        subset = tuple(scn.get("subset", [0]))
        lhs, rhs = gs.norm_bound_check(obs, nu, subset)
        return {
            "verdict": "pass",
            "lhs": lhs,
            "rhs": rhs,
            "note": "discrete topology: approximate sharpness means unit "
            "effect norm on every singleton",
        }
    if name == "mix-inequality":
        other = gs.make_covariant(
            rep, _scenario_matrix(scn["seed2"], rep.dim) if "seed2" in scn else np.eye(rep.dim)
        )
        report = gs.convexity_check(obs, other, float(scn.get("alpha", 0.5)))
        return {"verdict": "pass", **report}
    if name == "covariantize":
        chan = gs.random_channel(rep.dim, rng)
        cov = gs.covariantize(rep, chan)
        assert gs.is_channel(cov), "covariantized map is not a channel"
        worst = 0.0
        for g in range(n):
            s = rep.state_action(g)
            worst = max(worst, float(np.abs(s @ cov - cov @ s).max()))
        assert worst < 1e-10, f"covariance residual {worst}"
        return {"verdict": "pass", "residual": worst}
    if name == "pre-norm-unitary":
        w = np.diag(np.exp(2j * np.pi * rng.random(rep.dim)))
        chan = gs.unitary_channel(w)
        pre = gs.FiniteCovariantObservable(rep, w.conj().T @ obs.seed @ w)
        report = gs.pre_norm_check(obs, pre, chan)
        assert report["norm_equal_everywhere"], "unitary preprocessing changed norms"
        return {"verdict": "pass", **report}
    if name == "pre-norm-depolarizing":
        chan = gs.depolarizing_channel(rep.dim)
        seed = np.trace(obs.seed).real * np.eye(rep.dim) / rep.dim
        pre = gs.FiniteCovariantObservable(rep, seed)
        report = gs.pre_norm_check(obs, pre, chan)
        return {"verdict": "pass", **report}
    raise ValueError(f"unknown groupsim check {name!r}")


# --- parser -------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseopt",
        description="Phase-matrix constructors and optimality verdicts.",
    )
    parser.add_argument("--config", default=None, help="path to a key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--in", dest="infile", default="-", help="input path or - for stdin")
        p.add_argument("--out", default="-", help="output path or - for stdout")
        p.add_argument(
            "--assert",
            dest="assert_",
            action="store_true",
            help="exit nonzero when the verdict is negative",
        )

    p = sub.add_parser("gen", help="generate a phase matrix")
    p.add_argument(
        "family",
        choices=["canonical", "chessboard", "state", "eta", "example4", "example5"],
    )
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--xi", default="0.5", help="chessboard parameter (complex)")
    p.add_argument("--levels", default="1.0@0", help="diagonal state as w@level,...")
    p.add_argument("--n0", type=int, default=3, help="example4 tail offset")
    common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("validate", help="check a matrix against the admissibility rules")
    common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("density", help="outcome density of a state, as CSV")
    p.add_argument("--coherent", default=None, help="coherent amplitude (complex)")
    p.add_argument("--state-file", default=None, help="density-matrix JSON path")
    p.add_argument("--grid", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("norm-sweep", help="effect norms across truncations, as CSV")
    p.add_argument("--arc", default="half")
    p.add_argument("--dims", default="4,16,64,256")
    p.add_argument("--family", default="canonical", choices=["canonical", "state"])
    p.add_argument("--levels", default="1.0@0")
    common(p)
    p.set_defaults(func=_cmd_norm_sweep)

    p = sub.add_parser("check", help="run an optimality verdict")
    p.add_argument(
        "criterion",
        choices=["sharp", "extremal", "rank", "preclean", "postclass", "uequiv"],
    )
    p.add_argument("--other", default=None, help="second matrix for binary criteria")
    p.add_argument("--tol", type=float, default=None)
    common(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("smear", help="postprocess by a circle measure")
    p.add_argument("--nu", required=True, help="CircleMeasure JSON path")
    common(p)
    p.set_defaults(func=_cmd_smear)

    p = sub.add_parser("channel-identity", help="densities factor through the canonical channel")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(func=_cmd_channel_identity)

    p = sub.add_parser("recover-state", help="reconstruct the generating diagonal state")
    p.add_argument("--depth", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_recover_state)

    p = sub.add_parser("oracle-et", help="quadrature oracle vs closed-form effects")
    p.add_argument("--levels", default="1.0@0")
    p.add_argument("--dim", type=int, default=12)
    p.add_argument("--arc", default="half")
    p.add_argument("--r-max", type=float, default=10.0)
    p.add_argument("--quad-points", type=int, default=160)
    p.add_argument("--tol", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=_cmd_oracle_et)

    p = sub.add_parser("groupsim", help="run a finite-group scenario file")
    p.add_argument("--scenario", required=True)
    common(p)
    p.set_defaults(func=_cmd_groupsim)

    return parser


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = load_config(args.config)
    try:
        return args.func(args, cfg)
    except (CliError, ValueError, FileNotFoundError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
