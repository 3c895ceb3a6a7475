"""vemrun: command-line front end for runs, studies, and mesh generation.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 IO error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .analysis import convergence_study, fit_slope, h1_error, probe, write_study_csv
from .config import ConfigError, RunConfig, load_run_config
from .generators import build_mesh
from .materials import MaterialModel
from .mesh import (
    Domain,
    MeshError,
    mean_diameter,
    read_vpoly,
    validate_mesh,
    write_vpoly,
)
from .output import write_run_json, write_solution_csv, write_vtk
from .problems import (
    PROBLEMS,
    build_problem,
    dirichlet_from_tags,
    probe_point,
    problem_domain,
    tractions_from_tag,
)
from .solver import ProblemSetup, SolverFailure, StabConfig, solve_with_stepping

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def _model_from_config(cfg: RunConfig) -> MaterialModel:
    return MaterialModel(
        cfg.model_kind,
        cfg.E,
        cfg.nu,
        mr_ratio=cfg.mr_ratio,
        ogden_alphas=cfg.ogden_alphas,
        ogden_mu_fractions=cfg.ogden_mu_fractions,
    )


def _stab_from_config(cfg: RunConfig) -> StabConfig:
    return StabConfig(
        alpha_mode=cfg.stab_alpha,
        taylor_order=cfg.stab_taylor_order,
        nu0=cfg.stab_nu0,
        mvee_tol=cfg.stab_mvee_tol,
    )


def _mesh_opts(cfg: RunConfig) -> dict:
    return {
        "seed": cfg.mesh_seed,
        "distortion": cfg.mesh_distortion,
        "lloyd_iters": cfg.mesh_lloyd_iters,
        "serration": cfg.mesh_serration,
    }


def _build_setup(cfg: RunConfig):
    """Mesh + ProblemSetup for a single run; returns (mesh, setup)."""
    model = _model_from_config(cfg)
    stab = _stab_from_config(cfg)
    newton_kw = dict(
        newton_tol_rel=cfg.newton_tol_rel,
        newton_max_iter=cfg.newton_max_iter,
    )
    if cfg.problem == "custom":
        mesh = read_vpoly(cfg.mesh_file)
        validate_mesh(mesh, check_domain_area=not mesh.meta.get("domain_inferred", False))
        tags = {t for t in mesh.boundary_edges.values()}
        for tag in list(cfg.dirichlet) + list(cfg.tractions):
            if tag not in tags:
                raise ConfigError(f"boundary tag {tag!r} not present in {cfg.mesh_file}")
        tractions = []
        for tag, t in cfg.tractions.items():
            tractions.extend(tractions_from_tag(mesh, tag, t))
        setup = ProblemSetup(
            mesh=mesh,
            model=model,
            stab=stab,
            dirichlet=dirichlet_from_tags(mesh, cfg.dirichlet),
            tractions=tractions,
            body_force=tuple(cfg.body_force),
            steps=cfg.steps,
            adaptive=cfg.adaptive,
            **newton_kw,
        )
        return mesh, setup
    domain = problem_domain(cfg.problem)
    mesh = build_mesh(cfg.mesh_family, cfg.mesh_N, domain, **_mesh_opts(cfg))
    setup = build_problem(
        cfg.problem,
        mesh,
        model,
        stab=stab,
        load=cfg.load,
        steps=cfg.steps,
        adaptive=cfg.adaptive,
        **newton_kw,
    )
    if any(v != 0.0 for v in cfg.body_force):
        setup.body_force = tuple(cfg.body_force)
    return mesh, setup


def cmd_run(args) -> int:
    try:
        cfg = load_run_config(args.config)
        if args.out_dir:
            cfg.out_dir = args.out_dir
        if args.seed is not None:
            cfg.mesh_seed = args.seed
        cfg.validate()
        mesh, setup = _build_setup(cfg)
    except (ConfigError, MeshError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO

    t0 = time.perf_counter()
    try:
        system = setup.compile()
        state = solve_with_stepping(system)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        for rec in exc.history:
            print(
                f"  step to lf={rec.load_factor:.6g}: iters={rec.iterations} "
                f"residual={rec.residual_norm:.3e} converged={rec.converged}",
                file=sys.stderr,
            )
        return EXIT_SOLVER
    runtime = time.perf_counter() - t0

    payload = {
        "config": cfg.effective_dict(),
        "mesh": {
            "family": mesh.family,
            "n_elements": mesh.n_elements,
            "n_vertices": mesh.n_vertices,
            "mean_diameter": mean_diameter(mesh),
        },
        "solve": {
            "converged": state.converged,
            "newton_iters_total": state.newton_iters_total,
            "steps": [
                {
                    "load_factor": r.load_factor,
                    "iterations": r.iterations,
                    "residual_norm": r.residual_norm,
                    "converged": r.converged,
                }
                for r in state.steps
            ],
        },
        "runtime_s": runtime,
    }
    if cfg.problem != "custom":
        p = probe(mesh, state.u, probe_point(cfg.problem, mesh.domain))
        payload["probe"] = {
            "point": probe_point(cfg.problem, mesh.domain).tolist(),
            "ux": float(p[0]),
            "uy": float(p[1]),
        }
        print(f"probe displacement: ux={p[0]:.8g} uy={p[1]:.8g}")
    else:
        umax = float(np.abs(state.u).max())
        payload["max_abs_displacement"] = umax
        print(f"max |u|: {umax:.8g}")

    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
        write_solution_csv(os.path.join(cfg.out_dir, "solution.csv"), mesh, state.u)
        write_vtk(os.path.join(cfg.out_dir, "deformed.vtk"), mesh, state.u)
        write_run_json(os.path.join(cfg.out_dir, "run.json"), payload)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"artifacts written to {cfg.out_dir}")
    return EXIT_OK


def cmd_study(args) -> int:
    try:
        cfg = load_run_config(args.config)
        if args.out_dir:
            cfg.out_dir = args.out_dir
        if args.seed is not None:
            cfg.mesh_seed = args.seed
        cfg.validate(for_study=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO

    alphas = cfg.study_alpha or (cfg.stab_alpha,)
    cache_dir = cfg.reference_cache_dir or os.path.join(cfg.out_dir, "qref_cache")
    model_opts = {
        "mr_ratio": cfg.mr_ratio,
        "ogden_alphas": cfg.ogden_alphas,
        "ogden_mu_fractions": cfg.ogden_mu_fractions,
    }
    records = []
    slopes = {}
    try:
        for alpha in alphas:
            recs, sl = convergence_study(
                cfg.problem,
                cfg.mesh_family,
                list(cfg.study_N),
                list(cfg.study_nu),
                model_kind=cfg.model_kind,
                E=cfg.E,
                alpha_mode=alpha,
                load=cfg.load,
                ref_level=cfg.reference_level,
                cache_dir=cache_dir,
                steps=cfg.steps,
                adaptive=cfg.adaptive,
                mesh_opts=_mesh_opts(cfg),
                model_opts=model_opts,
            )
            records.extend(recs)
            for nu, s in sl.items():
                slopes[f"alpha={alpha} nu={nu:.10g}"] = s
    except SolverFailure as exc:
        print(f"solver failure while building the reference: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    try:
        os.makedirs(cfg.out_dir, exist_ok=True)
        path = os.path.join(cfg.out_dir, "study.csv")
        with open(path, "w", encoding="utf-8") as f:
            from .analysis import STUDY_CSV_HEADER

            f.write(STUDY_CSV_HEADER + "\n")
            for r in records:
                f.write(r.csv_row() + "\n")
            for key, s in slopes.items():
                f.write(f"# slope {key}: {'n/a' if s is None else f'{s:.6g}'}\n")
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO

    n_fail = sum(1 for r in records if r.failed)
    for key, s in slopes.items():
        print(f"slope {key}: {'n/a' if s is None else f'{s:.4g}'}")
    print(f"study complete: {len(records)} runs ({n_fail} failed); CSV at {path}")
    return EXIT_OK


def _parse_domain(spec: str) -> Domain:
    if spec == "unit-square":
        return Domain.unit_square()
    if spec.startswith("rectangle:"):
        vals = [float(t) for t in spec.split(":", 1)[1].split(",")]
        if len(vals) != 2:
            raise ConfigError("rectangle domain needs 'rectangle:W,H'")
        return Domain.rectangle(*vals)
    if spec.startswith("quad:"):
        vals = [float(t) for t in spec.split(":", 1)[1].split(",")]
        if len(vals) != 8:
            raise ConfigError("quad domain needs 'quad:x0,y0,x1,y1,x2,y2,x3,y3'")
        return Domain(np.array(vals).reshape(4, 2))
    raise ConfigError(f"unknown domain spec {spec!r}")


def cmd_mesh(args) -> int:
    try:
        domain = _parse_domain(args.domain)
        mesh = build_mesh(
            args.family,
            args.N,
            domain,
            seed=args.seed if args.seed is not None else 0,
            distortion=args.distortion,
            lloyd_iters=args.lloyd_iters,
            serration=args.serration,
        )
        validate_mesh(mesh)
    except (ConfigError, MeshError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        write_vpoly(mesh, args.output)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(
        f"wrote {args.output}: {mesh.n_vertices} vertices, {mesh.n_elements} elements, "
        f"{len(mesh.boundary_edges)} boundary edges"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vemrun",
        description="Plane-strain hyperelastic virtual element solver on polygonal meshes",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="solve a single configuration")
    pr.add_argument("config", help="path to a key = value run config")
    pr.add_argument("--out-dir", default=None)
    pr.add_argument("--seed", type=int, default=None)
    pr.set_defaults(func=cmd_run)

    ps = sub.add_parser("study", help="run a convergence study")
    ps.add_argument("config", help="path to a run config with study.* sweeps")
    ps.add_argument("--out-dir", default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.set_defaults(func=cmd_study)

    pm = sub.add_parser("mesh", help="generate a mesh and write VPOLY")
    pm.add_argument("family", choices=("sq1", "dq2s", "sns", "isns", "vrn"))
    pm.add_argument("N", type=int)
    pm.add_argument("--domain", default="unit-square")
    pm.add_argument("--seed", type=int, default=None)
    pm.add_argument("--distortion", type=float, default=0.25)
    pm.add_argument("--lloyd-iters", type=int, default=10)
    pm.add_argument("--serration", type=float, default=0.15)
    pm.add_argument("-o", "--output", required=True)
    pm.set_defaults(func=cmd_mesh)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
