"""Command-line entry point ``glvx``.

Exit codes: 0 ok, 2 configuration/parameter error, 3 numerical failure
(solver divergence, blow-up, undefined degree), 4 topology change during
tracking, 5 comparison or verification failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import _kernels
from . import asymptotics
from . import lattice as lt
from .config import ExperimentConfig, parse_config
from .errors import ComparisonFailure, ConfigError, GLVortexError
from .experiments import initial_state, profiles_for, run_experiment
from .profiles import ProfileParams, save_profile, solve_profile
from .snapshot import write_snapshot
from .tracking import locate_vortices


def _with_overrides(config: ExperimentConfig, args, model: str | None = None) -> ExperimentConfig:
    changes = {}
    if model is not None:
        changes["model"] = model
    if getattr(args, "out", None):
        changes["output_dir"] = args.out
    return dataclasses.replace(config, **changes) if changes else config


def _require_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this command", "--config")
    return parse_config(args.config)


def cmd_profile(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    if args.config:
        config = parse_config(args.config)
        profiles = profiles_for(config).values()
    else:
        if args.n is None or args.lam is None:
            raise ConfigError("give --config or both --n and --lambda", "--n")
        profiles = [solve_profile(ProfileParams(args.n, args.lam, args.r_max, args.num_points))]
    summary = {}
    for prof in profiles:
        save_profile(prof, out / f"profile_n{prof.n}")
        summary[f"n={prof.n}"] = dataclasses.asdict(prof.scalars)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_glue(args) -> int:
    config = _with_overrides(_require_config(args), args)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    state, momentum, _ = initial_state(config)
    write_snapshot(out / "glued.glvx", state, momentum)
    summary = {
        "lattice": {"extent": state.lattice.extent, "points": state.lattice.points, "spacing": state.lattice.h},
        "energy": lt.energy(state),
        "flux": lt.flux(state),
        "degree": lt.degree(state),
        "gradient_norm": lt.norm(lt.gl_gradient(state), state.lattice.h),
        "vortices": [{"x": o.position[0], "y": o.position[1], "charge": o.charge, "core_value": o.core_value}
                     for o in locate_vortices(state)],
    }
    if momentum is not None:
        summary["hamiltonian"] = lt.hamiltonian(state, momentum)
        summary["gauss_residual"] = lt.gauss_residual(state, momentum)
    (out / "glued.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary, indent=2))
    return 0


def _run(args, model: str, compare: bool) -> int:
    config = _with_overrides(_require_config(args), args, model)
    result = run_experiment(config, compare=compare)
    for name, path in result.files.items():
        print(f"{name}: {path}")
    if result.report is not None:
        print(f"comparison verdicts: {result.report.verdicts}")
        if not result.report.passed:
            raise ComparisonFailure(f"comparison failed: {result.report.verdicts}")
    return 0


def cmd_evolve_gf(args) -> int:
    return _run(args, "gradient_flow", compare=False)


def cmd_evolve_mh(args) -> int:
    return _run(args, "maxwell_higgs", compare=False)


def cmd_effective(args) -> int:
    config = _require_config(args)
    model = {"gradient_flow": "effective_gf", "maxwell_higgs": "effective_mh"}.get(config.model, config.model)
    return _run(args, model, compare=False)


def cmd_compare(args) -> int:
    config = _require_config(args)
    if not config.is_pde:
        raise ConfigError("compare needs a PDE model (gradient_flow or maxwell_higgs)", "model")
    if len(config.vortices) < 2:
        raise ConfigError("compare needs at least two vortices", "vortices")
    return _run(args, None, compare=True)


def cmd_verify_asymptotics(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    rows = asymptotics.run_checks()
    asymptotics.write_report(out / "asymptotics_report.csv", rows)
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} [{r.parameters}] measured={r.measured:.6g} "
              f"expected={r.expected:.6g}")
    if not all(r.passed for r in rows):
        raise ComparisonFailure("asymptotic verification failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glvx", description="Ginzburg-Landau vortex laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment TOML file")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--threads", type=int, help="worker threads (overrides GLVX_THREADS)")
        return p

    p = common(sub.add_parser("profile", help="solve radial vortex profiles"))
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--r-max", type=float, default=25.0)
    p.add_argument("--num-points", type=int, default=2048)
    p.set_defaults(func=cmd_profile)
    common(sub.add_parser("glue", help="build the glued initial field")).set_defaults(func=cmd_glue)
    common(sub.add_parser("evolve-gf", help="run the gradient flow")).set_defaults(func=cmd_evolve_gf)
    common(sub.add_parser("evolve-mh", help="run the Maxwell-Higgs dynamics")).set_defaults(func=cmd_evolve_mh)
    common(sub.add_parser("effective", help="integrate the effective point-vortex law")).set_defaults(
        func=cmd_effective)
    common(sub.add_parser("compare", help="run PDE and effective law and compare")).set_defaults(func=cmd_compare)
    common(sub.add_parser("verify-asymptotics", help="quadrature checks of the integral lemmas")).set_defaults(
        func=cmd_verify_asymptotics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads if args.threads is not None else os.environ.get("GLVX_THREADS")
    try:
        if threads is not None:
            _kernels.set_workers(int(threads))
        return args.func(args)
    except GLVortexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
