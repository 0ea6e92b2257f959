"""Command-line interface: generate problems, solve them, run benchmark
sweeps, and cross-check against the exhaustive oracle.

Exit codes: 0 success, 2 invalid flags or config, 3 I/O failure, 4 problem
file parse failure, 5 solver error, 6 oracle budget exceeded. stdout carries
data; diagnostics go to stderr. All indices in files and output are 1-based.
Every run echoes its fully-resolved configuration to a sidecar file.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import bench
from .errors import BudgetExceeded, SparsekitError
from .rng import RngStream, derive_seed
from .synth import DEFAULT_ORACLE_BUDGET, exhaustive_oracle, gen_dictionary, gen_instance, read_problem, write_problem

PURSUIT_ALGS = ("mp", "omp", "sp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsekit", description="Sparse recovery toolkit command line"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a planted problem file")
    p_gen.add_argument("--n", type=int, required=True, help="signal dimension")
    p_gen.add_argument("--m", type=int, required=True, help="representation size")
    p_gen.add_argument("--k", type=int, required=True, help="number of active components")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="problem file to write")
    p_gen.set_defaults(func=cmd_gen)

    p_solve = sub.add_parser("solve", help="solve a problem file")
    p_solve.add_argument("problem", help="problem file path")
    p_solve.add_argument("--alg", choices=bench.ALGORITHMS, required=True)
    p_solve.add_argument("--k", type=int, help="sparsity target (default: the file's K)")
    p_solve.add_argument("--seed", type=int, default=0, help="solver random stream seed")
    p_solve.add_argument("--eps", type=float, help="stopping tolerance")
    p_solve.add_argument("--eps-relative", action="store_true", help="interpret --eps relative to ||x||")
    p_solve.add_argument("--lambda", dest="lam", type=float, help="sparsity penalty weight")
    p_solve.add_argument("--population", type=int, help="CE/SCE samples per batch")
    p_solve.add_argument("--elite-ratio", type=float)
    p_solve.add_argument("--alpha", type=float, help="CE/SCE distribution step size")
    p_solve.add_argument("--max-iters", type=int)
    p_solve.add_argument("--inner-iters", type=int, help="SCE inner CE iterations")
    p_solve.add_argument("--outer-iters", type=int, help="SCE outer iterations")
    p_solve.add_argument("--format", choices=("human", "records"), default="human")
    p_solve.add_argument("--out-dir", default=".", help="directory for the sidecar config echo")
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="run a benchmark sweep")
    p_bench.add_argument("--config", help="flat key=value sweep configuration file")
    p_bench.add_argument("--n", type=int)
    p_bench.add_argument("--m", type=int, help="fixed m for a k-sweep")
    p_bench.add_argument("--k", type=int, help="fixed k for an m-sweep")
    p_bench.add_argument("--m-values", help="comma-separated sweep values")
    p_bench.add_argument("--k-values", help="comma-separated sweep values")
    p_bench.add_argument("--alg", help="comma-separated algorithm subset")
    p_bench.add_argument("--matrices", type=int, help="matrices per sweep point")
    p_bench.add_argument("--vectors", type=int, help="vectors per matrix")
    p_bench.add_argument("--seed", type=int, help="base seed")
    p_bench.add_argument("--axes", choices=("linear", "log"), default="linear")
    p_bench.add_argument("--out-dir", default="bench_out")
    p_bench.set_defaults(func=cmd_bench)

    p_oracle = sub.add_parser("oracle", help="exhaustive oracle on a problem file")
    p_oracle.add_argument("problem", help="problem file path")
    p_oracle.add_argument("--k", type=int, help="subset size (default: the file's K)")
    p_oracle.add_argument("--budget", type=int, default=DEFAULT_ORACLE_BUDGET)
    p_oracle.add_argument("--out-dir", default=".", help="directory for the sidecar config echo")
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def _write_sidecar(path: str, resolved: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        for key in sorted(resolved):
            fh.write(f"{key}={resolved[key]}\n")


def cmd_gen(args) -> int:
    if args.n < 1 or args.m < 1 or args.k < 1 or args.k > args.m:
        print("gen: need 1 <= k <= m and n >= 1", file=sys.stderr)
        return 2
    D = gen_dictionary(args.n, args.m, derive_seed(args.seed, 0))
    inst = gen_instance(D, args.k, derive_seed(args.seed, 1))
    inst.seed = args.seed  # file header records the user-facing seed
    write_problem(inst, args.out)
    _write_sidecar(
        args.out + ".config",
        {"command": "gen", "n": args.n, "m": args.m, "k": args.k, "seed": args.seed, "out": args.out},
    )
    return 0


def _solver_params(args, algorithm: str) -> dict:
    """Translate CLI flags into solver parameter overrides."""
    params: dict = {}
    if algorithm in PURSUIT_ALGS:
        if args.eps is not None:
            params["residual_tol"] = args.eps
        if args.max_iters is not None:
            params["max_iters"] = args.max_iters
        return params
    if args.eps is not None:
        params["stop_eps"] = args.eps
    if args.eps_relative:
        params["eps_relative"] = True
    if args.lam is not None:
        params["lam"] = args.lam
    if args.population is not None:
        params["population"] = args.population
    if args.elite_ratio is not None:
        params["elite_ratio"] = args.elite_ratio
    if args.alpha is not None:
        params["step_size"] = args.alpha
    if algorithm == "ce" and args.max_iters is not None:
        params["max_iters"] = args.max_iters
    if algorithm == "sce":
        if args.inner_iters is not None:
            params["inner_iters"] = args.inner_iters
        if args.outer_iters is not None:
            params["outer_iters"] = args.outer_iters
    return params


def cmd_solve(args) -> int:
    try:
        inst = read_problem(args.problem)
    except FileNotFoundError as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return 4
    k = args.k if args.k is not None else inst.k
    params = _solver_params(args, args.alg)
    try:
        run, eps_fn = bench._solver_call(args.alg, k, params)
    except (ValueError, TypeError) as exc:
        print(f"solve: invalid parameters: {exc}", file=sys.stderr)
        return 2
    stream = RngStream(args.seed).child(1, bench.ALGORITHMS.index(args.alg))
    x = inst.signal
    start = time.perf_counter()
    try:
        sol = run(inst.dictionary, x, stream)
    except SparsekitError as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return 5
    elapsed = time.perf_counter() - start

    order = np.argsort(sol.support)
    support = sol.support[order]
    values = sol.values[order]
    found = set(int(j) for j in support)
    true_set = set(int(j) for j in inst.true_support)
    if args.format == "records":
        record = bench.BenchRecord(
            algorithm=args.alg,
            n=inst.n,
            m=inst.m,
            k=k,
            matrix_seed=inst.seed,
            vector_seed=inst.seed,
            runtime_seconds=elapsed,
            exact_recovery=found == true_set,
            support_overlap=len(found & true_set) / k if k else 0.0,
            residual_norm=sol.residual_norm,
            converged=sol.residual_norm <= eps_fn(x),
            bottom_up_transfers=sol.bottom_up_transfers,
        )
        print(",".join(bench.RECORD_FIELDS))
        print(",".join(bench._format_value(getattr(record, f)) for f in bench.RECORD_FIELDS))
    else:
        print(f"algorithm: {args.alg}")
        print("support:", " ".join(str(int(j) + 1) for j in support))
        print("coefficients:", " ".join(f"{v:.17g}" for v in values))
        print(f"residual_norm: {sol.residual_norm:.17g}")
        print(f"iterations: {sol.iterations}")
        print(f"bottom_up_transfers: {sol.bottom_up_transfers}")
        print(f"runtime_seconds: {elapsed:.6f}")
    resolved = {
        "command": "solve",
        "problem": args.problem,
        "alg": args.alg,
        "k": k,
        "seed": args.seed,
        "format": args.format,
    }
    resolved.update({f"param.{key}": value for key, value in params.items()})
    _write_sidecar(os.path.join(args.out_dir, "solve.config"), resolved)
    return 0


def _parse_config_file(path: str) -> dict[str, str]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    out = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def _int_list(value: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in value.replace(",", " ").split())


def cmd_bench(args) -> int:
    settings: dict[str, str] = {}
    if args.config:
        try:
            settings = _parse_config_file(args.config)
        except FileNotFoundError as exc:
            print(f"bench: {exc}", file=sys.stderr)
            return 3
        except ValueError as exc:
            print(f"bench: {exc}", file=sys.stderr)
            return 2
    # flags win over the config file
    if args.n is not None:
        settings["n"] = str(args.n)
    if args.m is not None:
        settings["m"] = str(args.m)
    if args.k is not None:
        settings["k"] = str(args.k)
    if args.m_values:
        settings["m_values"] = args.m_values
    if args.k_values:
        settings["k_values"] = args.k_values
    if args.alg:
        settings["algorithms"] = args.alg
    if args.matrices is not None:
        settings["matrices_per_point"] = str(args.matrices)
    if args.vectors is not None:
        settings["vectors_per_matrix"] = str(args.vectors)
    if args.seed is not None:
        settings["base_seed"] = str(args.seed)

    overrides: dict[str, dict] = {}
    plain: dict[str, str] = {}
    for key, value in settings.items():
        if "." in key:
            alg, _, param = key.partition(".")
            overrides.setdefault(alg, {})[param] = _coerce(value)
        else:
            plain[key] = value
    try:
        cfg = bench.SweepConfig(
            n=int(plain["n"]),
            k=int(plain["k"]) if "k" in plain else None,
            m=int(plain["m"]) if "m" in plain else None,
            m_values=_int_list(plain["m_values"]) if "m_values" in plain else None,
            k_values=_int_list(plain["k_values"]) if "k_values" in plain else None,
            algorithms=tuple(plain["algorithms"].replace(",", " ").split())
            if "algorithms" in plain
            else bench.ALGORITHMS,
            matrices_per_point=int(plain.get("matrices_per_point", 10)),
            vectors_per_matrix=int(plain.get("vectors_per_matrix", 10)),
            base_seed=int(plain.get("base_seed", 0)),
            overrides=overrides,
        )
    except (KeyError, ValueError) as exc:
        print(f"bench: invalid sweep configuration: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out_dir, exist_ok=True)
    resolved = {
        "command": "bench",
        "n": cfg.n,
        "k": cfg.k,
        "m": cfg.m,
        "m_values": cfg.m_values,
        "k_values": cfg.k_values,
        "algorithms": ",".join(cfg.algorithms),
        "matrices_per_point": cfg.matrices_per_point,
        "vectors_per_matrix": cfg.vectors_per_matrix,
        "base_seed": cfg.base_seed,
        "axes": args.axes,
        "out_dir": args.out_dir,
    }
    for alg, params in sorted(cfg.overrides.items()):
        for param, value in sorted(params.items()):
            resolved[f"{alg}.{param}"] = value
    _write_sidecar(os.path.join(args.out_dir, "bench.config"), resolved)

    try:
        records = bench.run_sweep(cfg)
    except (TypeError, ValueError) as exc:
        print(f"bench: invalid solver parameters: {exc}", file=sys.stderr)
        return 2
    bench.write_records(records, os.path.join(args.out_dir, "records.csv"))
    rows = bench.aggregate(records, sweep_param=cfg.sweep_param)
    bench.write_aggregates(rows, os.path.join(args.out_dir, "aggregates.csv"))
    bench.emit_plot_data(rows, os.path.join(args.out_dir, "plots"), axes=args.axes)
    print(bench.summarize(rows))
    return 0


def cmd_oracle(args) -> int:
    try:
        inst = read_problem(args.problem)
    except FileNotFoundError as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return 4
    k = args.k if args.k is not None else inst.k
    try:
        sol = exhaustive_oracle(inst.dictionary, inst.signal, k, budget=args.budget)
    except BudgetExceeded as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return 6
    except SparsekitError as exc:
        print(f"oracle: {exc}", file=sys.stderr)
        return 5
    print("support:", " ".join(str(int(j) + 1) for j in sol.support))
    print(f"residual_norm: {sol.residual_norm:.17g}")
    _write_sidecar(
        os.path.join(args.out_dir, "oracle.config"),
        {"command": "oracle", "problem": args.problem, "k": k, "budget": args.budget},
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"sparsekit: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
