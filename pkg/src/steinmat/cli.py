"""Command-line front end.

Subcommands: sample | ksd | mksde | gof | experiment-mle-vs-mksde |
experiment-gof | selftest.  Exit codes: 0 success, 1 usage/config error,
2 numeric failure.  Experiment subcommands write CSV tables plus rendered
PNG figures into the output directory.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import (build_expfam, build_kernel, build_manifold, build_model,
                     get_seed, load_config)
from .errors import ConfigError, SteinmatError
from .gof import gof_test
from .ksdstats import WeightedSample, bootstrap_se, u_and_v, weighted_gram
from .linalg import unvec
from .mksde import assemble, mf_numeric_mle, mf_small_f_mle, solve
from .models import MatrixFisher
from .sampling import MhConfig, sample_model
from .serialize import dump_json, read_samples, write_csv, write_samples
from .steinkernel import SteinKernelEvaluator


def _out_dir(args, doc):
    out = args.out or doc.get("output", {}).get("dir", ".")
    os.makedirs(out, exist_ok=True)
    return out


def cmd_sample(args):
    doc = load_config(args.config)
    man = build_manifold(doc)
    model = build_model(doc, man)
    blk = doc.get("sampler", {})
    n = int(blk.get("n", 100))
    seed = get_seed(doc, args.seed)
    method = blk.get("method")
    mh = MhConfig(step=blk.get("step"), burn_in=int(blk.get("burn_in", 1000)),
                  thin=int(blk.get("thin", 5)))
    pts = sample_model(model, n, seed=seed, method=method, mh_config=mh)
    out = _out_dir(args, doc)
    path = os.path.join(out, args.output_name or "samples.jsonl")
    header = {
        "manifold": {"kind": man.kind, "N": man.N, "r": man.r},
        "family": model.family,
        "params": model.params(),
        "seed": seed,
        "method": method or "auto",
        "n": n,
    }
    write_samples(path, header, pts)
    print(f"wrote {n} points to {path}")
    return 0


def _load_sample(args, man):
    header, pts = read_samples(args.samples)
    mk = header.get("manifold", {})
    if mk.get("kind") != man.kind or int(mk.get("N", -1)) != man.N:
        raise ConfigError("sample file manifold does not match config")
    for p in pts:
        man.validate(p)
    return WeightedSample(pts)


def cmd_ksd(args):
    doc = load_config(args.config)
    man = build_manifold(doc)
    model = build_model(doc, man)
    kern = build_kernel(doc)
    sample = _load_sample(args, man)
    ev = SteinKernelEvaluator(man, kern, model)
    gram = ev.gram(sample.points)
    u, v = u_and_v(ev, sample, gram=gram)
    gw = weighted_gram(ev, sample, gram=gram)
    seed = get_seed(doc, args.seed)
    report = {
        "n": sample.n,
        "u_stat": u,
        "v_stat": v,
        "u_se_bootstrap": bootstrap_se(gw, "U", seed=seed),
        "v_se_bootstrap": bootstrap_se(gw, "V", seed=seed),
        "kernel": doc.get("kernel", {}),
        "family": model.family,
        "seed": seed,
    }
    out = _out_dir(args, doc)
    dump_json(report, os.path.join(out, "ksd_report.json"))
    print(json.dumps({k: report[k] for k in
                      ("n", "u_stat", "v_stat", "u_se_bootstrap", "v_se_bootstrap")},
                     indent=2))
    return 0


def cmd_mksde(args):
    doc = load_config(args.config)
    man = build_manifold(doc)
    kern = build_kernel(doc)
    spec = build_expfam(doc, man)
    sample = _load_sample(args, man)
    kind = doc.get("estimator", {}).get("kind", "V")
    seed = get_seed(doc, args.seed)
    system = assemble(spec, kern, sample, kind=kind)
    sol = solve(system)
    report = {
        "theta_star": list(sol.theta_star),
        "null_space_rank": sol.null_space_rank,
        "objective": sol.objective_at_min,
        "n": sample.n,
        "statistic_kind": kind,
        "kernel": doc.get("kernel", {}),
        "family": spec.name,
        "seed": seed,
    }
    nn, r = man.point_shape
    if spec.name == "matrix_fisher":
        report["F_hat"] = unvec(sol.theta_star, nn, r)
        if args.compare_mle:
            f_num = mf_numeric_mle(sample.points, man, seed=seed)
            report["F_mle_numeric"] = f_num
            report["F_mle_small_f"] = mf_small_f_mle(sample.points)
    elif spec.name == "matrix_bingham":
        report["A_hat"] = unvec(sol.theta_star, nn, nn)
    out = _out_dir(args, doc)
    dump_json(report, os.path.join(out, "mksde_report.json"))
    print(json.dumps({"objective": sol.objective_at_min,
                      "null_space_rank": sol.null_space_rank,
                      "n": sample.n, "kind": kind}, indent=2))
    return 0


def cmd_gof(args):
    doc = load_config(args.config)
    man = build_manifold(doc)
    kern = build_kernel(doc)
    spec = build_expfam(doc, man)
    sample = _load_sample(args, man)
    blk = doc.get("gof", {})
    kind = doc.get("estimator", {}).get("kind", "V")
    seed = get_seed(doc, args.seed)
    res = gof_test(spec, kern, sample, kind=kind,
                   beta=float(blk.get("beta", 0.05)),
                   n_sim=int(blk.get("n_sim", 5000)), seed=seed)
    out = _out_dir(args, doc)
    report = res.report()
    report["family"] = spec.name
    report["kernel"] = doc.get("kernel", {})
    dump_json(report, os.path.join(out, "gof_report.json"))
    row = dict(report, kernel=json.dumps(report["kernel"], sort_keys=True))
    write_csv(os.path.join(out, "gof_report.csv"), list(row.keys()), [row])
    print(json.dumps(report, indent=2))
    return 0


def cmd_experiment_mle_vs_mksde(args):
    from .experiments import default_f0_grid, mle_vs_mksde
    from .figures import plot_estimator_errors

    doc = load_config(args.config) if args.config else {}
    sweep = doc.get("sweep", {})
    n_values = tuple(sweep.get("n_values", (50, 100, 300)))
    replicates = int(sweep.get("replicates", 20))
    seed = get_seed(doc, args.seed)
    rows = mle_vs_mksde(n_values=n_values, replicates=replicates, seed=seed,
                        threads=args.threads)
    out = _out_dir(args, doc)
    write_csv(os.path.join(out, "mle_vs_mksde.csv"),
              ["F0_label", "n", "replicate", "estimator", "frob_error"], rows)
    for label, _ in default_f0_grid():
        safe = label.replace("*", "x").replace(".", "p")
        plot_estimator_errors(rows, label, os.path.join(out, f"errors_{safe}.png"))
    meta = {"n_values": list(n_values), "replicates": replicates, "seed": seed}
    dump_json(meta, os.path.join(out, "mle_vs_mksde_meta.json"))
    print(f"wrote {len(rows)} rows to {out}/mle_vs_mksde.csv")
    return 0


def cmd_experiment_gof(args):
    from .experiments import gof_table
    from .figures import plot_gof_pvalues

    doc = load_config(args.config) if args.config else {}
    sweep = doc.get("sweep", {})
    gof_blk = doc.get("gof", {})
    n_values = tuple(sweep.get("n_values", (100, 150, 200, 250, 300)))
    f_scales = tuple(sweep.get("f_scales", (0.3, 1.0, 5.0)))
    replicates = int(sweep.get("replicates", 20))
    seed = get_seed(doc, args.seed)
    rows, medians = gof_table(
        f_scales=f_scales, n_values=n_values, replicates=replicates, seed=seed,
        beta=float(gof_blk.get("beta", 0.05)), n_sim=int(gof_blk.get("n_sim", 5000)),
        threads=args.threads,
    )
    out = _out_dir(args, doc)
    write_csv(os.path.join(out, "gof_pvalues.csv"),
              ["F_label", "n", "kind", "replicate", "p_value", "reject"], rows)
    write_csv(os.path.join(out, "gof_pvalues_median.csv"),
              ["kind", "F_label", "n", "median_p_value"], medians)
    plot_gof_pvalues(rows, os.path.join(out, "gof_pvalues.png"))
    meta = {"n_values": list(n_values), "f_scales": list(f_scales),
            "replicates": replicates, "seed": seed}
    dump_json(meta, os.path.join(out, "gof_meta.json"))
    print(f"wrote {len(rows)} rows to {out}/gof_pvalues.csv")
    return 0


def cmd_selftest(args):
    """Oracle-equivalence smoke suite: closed form vs generator sum."""
    from .kernels import GaussianKernel, InverseQuadraticKernel
    from .manifolds import Grassmann, Spd, Stiefel
    from .models import (MatrixBingham, MatrixFisher, MatrixFisherBingham,
                         Uniform, Wishart)
    from .sampling import sample_uniform

    rng = np.random.default_rng(0)
    worst = 0.0
    checks = 0
    for man in (Stiefel(3, 2), Grassmann(4, 2), Spd(2)):
        if man.kind == "spd":
            a = rng.standard_normal((2, 2)) * 0.3
            pts = np.stack([np.eye(2) + g @ g.T for g in
                            rng.standard_normal((6, 2, 2)) * 0.3])
            models = [Uniform(man), Wishart(man, np.eye(2) + a @ a.T, 4.5)]
        else:
            pts = sample_uniform(man, 6, seed=1)
            models = [Uniform(man), MatrixFisher(man, rng.standard_normal(man.point_shape))]
            if man.kind == "stiefel":
                amat = rng.standard_normal((man.N, man.N))
                models += [MatrixBingham(man, amat),
                           MatrixFisherBingham(man, amat, rng.standard_normal(man.point_shape))]
        for kern in (GaussianKernel(1.0), InverseQuadraticKernel(1.0, 0.5)):
            for model in models:
                ev = SteinKernelEvaluator(man, kern, model)
                for _ in range(8):
                    i, j = rng.integers(0, len(pts), 2)
                    c = ev.kp_closed(pts[i], pts[j])
                    b = ev.kp_bruteforce(pts[i], pts[j])
                    worst = max(worst, abs(c - b) / (1.0 + abs(b)))
                    checks += 1
    ok = worst <= 1e-9
    print(f"selftest: {checks} closed-vs-brute checks, worst rel err {worst:.3e} "
          f"-> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 2


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="steinmat",
        description="Kernel Stein discrepancy toolkit on matrix manifolds",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True, needs_samples=False):
        p.add_argument("--config", required=needs_config, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1)
        if needs_samples:
            p.add_argument("--samples", required=True, help="sample file (JSON lines)")

    p = sub.add_parser("sample", help="draw samples from the configured family")
    common(p)
    p.add_argument("--output-name", default=None)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("ksd", help="U/V statistics with bootstrap errors")
    common(p, needs_samples=True)
    p.set_defaults(fn=cmd_ksd)

    p = sub.add_parser("mksde", help="minimum-KSD parameter estimate")
    common(p, needs_samples=True)
    p.add_argument("--compare-mle", action="store_true")
    p.set_defaults(fn=cmd_mksde)

    p = sub.add_parser("gof", help="composite goodness-of-fit test")
    common(p, needs_samples=True)
    p.set_defaults(fn=cmd_gof)

    p = sub.add_parser("experiment-mle-vs-mksde",
                       help="estimator comparison study (CSV + figures)")
    common(p, needs_config=False)
    p.set_defaults(fn=cmd_experiment_mle_vs_mksde)

    p = sub.add_parser("experiment-gof", help="GoF p-value table (CSV + figure)")
    common(p, needs_config=False)
    p.set_defaults(fn=cmd_experiment_gof)

    p = sub.add_parser("selftest", help="closed form vs generator-sum oracle")
    p.set_defaults(fn=cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SteinmatError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
