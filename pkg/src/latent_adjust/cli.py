"""Command-line front end: ``analyze``, ``simulate`` and ``resemblance``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import eigenstrat, raw_regress, sva
from .core import GeneResult, LatentAdjustError, NumericalFailure, StudyDesign, ValidationError
from .evaluation import resemblance_until
from .ipod import SingularDesign, ZeroSpread
from .pipeline import LeappConfig, leapp
from .rank_estimate import RankConfig, parallel_analysis
from .simgen import SimScenario, generate
from . import benchmark

logger = logging.getLogger("latent_adjust")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
# checked before ValueError: LinAlgError and these subclass it
NUMERIC_ERRORS = (NumericalFailure, ArithmeticError, np.linalg.LinAlgError, SingularDesign, ZeroSpread)


class InputError(ValidationError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_matrix(path, ncols: Optional[int] = None) -> np.ndarray:
    """Headerless numeric CSV to a 2-D array; errors name the offending line."""
    rows = []
    width = ncols
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise InputError(f"{path}: line {lineno}: non-numeric value in {row!r}") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise InputError(
                    f"{path}: line {lineno}: expected {width} columns, found {len(vals)}"
                )
            if not all(np.isfinite(vals)):
                raise InputError(f"{path}: line {lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no data")
    return np.asarray(rows, dtype=float)


def read_vector(path) -> np.ndarray:
    M = read_matrix(path)
    if M.shape[0] != 1 and M.shape[1] != 1:
        raise InputError(f"{path}: expected a single row or column, got shape {M.shape}")
    return M.ravel()


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([fmt(v) for v in row])


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_result(path, res: GeneResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gene_index", "t_stat", "p_value", "rank", "gamma_hat"])
        gh = res.gamma_hat
        for i in range(res.t_stat.size):
            w.writerow(
                [i, fmt(res.t_stat[i]), fmt(res.p_value[i]), int(res.rank[i]),
                 "" if gh is None else fmt(gh[i])]
            )


def _parse_k(text: str):
    if text == "auto":
        return None
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--k must be an integer or 'auto', got {text!r}")
    if k < 0:
        raise argparse.ArgumentTypeError("--k must be nonnegative")
    return k


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def analyze_dataset(Y, design: StudyDesign, method: str, k, tau: str = "mad", seed: int = 0):
    """Run one method; returns the result and a metadata dict."""
    rank_cfg = RankConfig(seed=seed)
    meta = {"method": method, "N": int(Y.shape[0]), "n": int(Y.shape[1]), "s": design.s}
    if method == "leapp":
        cfg = LeappConfig(k=k, rank_cfg=rank_cfg, sparse_gamma=(tau == "mad"))
        res, latent = leapp(Y, design, cfg)
        meta.update(
            k=int(res.meta["k"]),
            k_estimated=bool(res.meta["k_estimated"]),
            tau_hat=float(res.tau_hat),
            tau_method=tau,
            crisscross_converged=bool(latent.converged),
            crisscross_iterations=int(latent.iterations),
            sigma_floor_genes=res.meta["sigma_floor_genes"],
        )
        return res, meta
    if method == "raw":
        return raw_regress(Y, design), meta
    if k is None:
        d = design.normalized()
        D = np.column_stack([d.g, d.X])
        B, *_ = np.linalg.lstsq(D, Y.T, rcond=None)
        cap = d.n - d.s - 2
        k = parallel_analysis(Y - (D @ B).T, replace(rank_cfg, max_rank=cap))
        meta["k_estimated"] = True
        if k == 0:
            logger.warning("estimated rank is 0; using k=1 for %s", method)
            k = 1
    meta["k"] = int(k)
    fn = {"sva": sva, "eigenstrat": eigenstrat}[method]
    return fn(Y, design, k), meta


def cmd_analyze(args) -> int:
    Y = read_matrix(args.y)
    g = read_vector(args.g)
    X = read_matrix(args.x) if args.x else None
    design = StudyDesign(g, X).normalized(center=True)
    res, meta = analyze_dataset(Y, design, args.method, args.k, args.tau, args.seed)
    out = Path(args.out)
    write_result(out, res)
    write_json(out.with_name(out.name + ".json"), meta)
    return EXIT_OK


def _cell_name(sc: SimScenario) -> str:
    return f"snr{sc.snr:g}_lnr{sc.lnr:g}_rho{sc.rho:g}"


def _write_predictions(path: Path, results, method: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "gene_index", "score", "truth"])
        for r in results:
            score = np.abs(r.t_stats[method])
            for i in range(score.size):
                w.writerow([r.replicate, i, fmt(score[i]), int(r.truth[i])])


def cmd_simulate(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - set(benchmark.METHODS)
    if unknown:
        raise InputError(f"unknown methods: {sorted(unknown)}")
    if args.reps < 1:
        raise InputError("--reps must be >= 1")
    base = SimScenario(n=args.n, N=args.N, snr=args.snr[0], lnr=args.lnr[0], rho=args.rho[0],
                       pi=args.pi, k=args.k, seed=args.seed)
    cells = benchmark.scenario_grid(base, args.snr, args.lnr, args.rho)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    shared = args.tissues is not None
    reps = args.tissues if shared else args.reps

    summary = []
    for c_idx, sc in enumerate(cells):
        def progress(done, total, name=_cell_name(sc)):
            if args.progress:
                print(f"[{c_idx + 1}/{len(cells)}] {name}: replicate {done}/{total}",
                      file=sys.stderr, flush=True)

        results = benchmark.run_replicates(sc, reps, methods, progress=progress, shared_gamma=shared)
        cell_dir = out_dir / _cell_name(sc)
        cell_dir.mkdir(exist_ok=True)
        for m in methods:
            _write_predictions(cell_dir / f"predictions_{m}.csv", results, m)
            if shared:
                write_matrix(cell_dir / f"pvals_{m}.csv",
                             np.column_stack([r.p_values[m] for r in results]))
        if args.save_data:
            data_dir = cell_dir / "data"
            data_dir.mkdir(exist_ok=True)
            for r in range(reps):
                Y, d, truth = generate(sc, r, gamma_key=0 if shared else None)
                write_matrix(data_dir / f"rep{r:04d}_y.csv", Y.values)
                write_matrix(data_dir / f"rep{r:04d}_g.csv", d.g[:, None])
                write_matrix(data_dir / f"rep{r:04d}_truth.csv",
                             np.column_stack([truth.gamma, truth.sigma, truth.U]))
        summary.append({
            "scenario": asdict(sc),
            "reps": reps,
            "shared_gamma": shared,
            "methods": benchmark.summarize(results, methods),
        })
    write_json(out_dir / "summary.json", {"cells": summary})
    return EXIT_OK


def cmd_resemblance(args) -> int:
    P = read_matrix(args.pvals)
    if P.shape[1] < 2:
        raise InputError(f"{args.pvals}: need at least two p-value columns")
    rows = resemblance_until(P, args.u_max)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "I_alpha", "U_alpha"])
        for a, i, u in rows:
            w.writerow([fmt(a), i, u])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latent-adjust", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="rank genes in one dataset")
    a.add_argument("--y", required=True, help="N x n response CSV (row = gene)")
    a.add_argument("--g", required=True, help="primary variable CSV (n values)")
    a.add_argument("--x", help="n x s covariate CSV")
    a.add_argument("--method", choices=["leapp", "raw", "sva", "eigenstrat"], default="leapp")
    a.add_argument("--k", type=_parse_k, default=None, help="latent rank or 'auto'")
    a.add_argument("--tau", choices=["mad", "df"], default="mad")
    a.add_argument("--seed", type=int, default=0, help="seed for rank estimation")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="simulation benchmark over a scenario grid")
    s.add_argument("--n", type=int, default=60)
    s.add_argument("--N", type=int, default=1000)
    s.add_argument("--snr", type=_floats, default=[1.0])
    s.add_argument("--lnr", type=_floats, default=[2.0])
    s.add_argument("--rho", type=_floats, default=[0.5])
    s.add_argument("--pi", type=float, default=0.1)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--methods", default=",".join(benchmark.METHODS))
    s.add_argument("--tissues", type=int, default=None,
                   help="multi-dataset mode: M datasets sharing one effect vector")
    s.add_argument("--save-data", action="store_true", help="also write Y, g and truth CSVs")
    s.add_argument("--progress", action="store_true")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("resemblance", help="pooled overlap curve of significant-gene lists")
    r.add_argument("--pvals", required=True, help="N x M p-value CSV, one column per dataset")
    r.add_argument("--u-max", type=int, default=700)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_resemblance)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except LatentAdjustError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
