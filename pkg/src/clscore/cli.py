"""Command-line front end: ``clscore build|score|sweep|eigenmap|export``."""

import argparse
import logging
import sys

from . import io
from .complex import build_vietoris_rips, compute_distances, compute_weights, weight_scheme
from .errors import ClscoreError
from .inference import PermutationConfig, score_report, sweep_epsilon
from .spectral import eigenmap

log = logging.getLogger("clscore")


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _add_input(p, epsilon=True):
    p.add_argument("--input", help="coordinates (rows = samples) or a precomputed distance matrix, CSV/TSV")
    p.add_argument("--metric", choices=["euclidean", "correlation", "precomputed"], default="euclidean")
    if epsilon:
        p.add_argument("--epsilon", type=float, help="Vietoris-Rips scale (edges with d <= epsilon)")
    p.add_argument("--max-dim", type=int, default=None, help="largest simplex dimension to build")
    p.add_argument("--weights", choices=["unit", "coface"], default="coface")


def _add_complex(p):
    p.add_argument("--complex", help="complex JSON (from `build` or an external tool)")


def _add_out(p):
    p.add_argument("--out", default="-", help="output path ('-' for standard output)")


def _add_scoring(p):
    p.add_argument("--features", help="1-point features TSV (rows = features)")
    p.add_argument("--pair-features", help="2-point features TSV (i, j, value triplets)")
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--agg", choices=["mean", "min", "max"], default="mean")
    p.add_argument("--parts", choices=["both", "up", "down"], default="both")
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="clscore", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a weighted Vietoris-Rips complex and write complex JSON")
    _add_input(p)
    _add_out(p)

    p = sub.add_parser("score", help="combinatorial Laplacian scores with permutation p-values")
    _add_complex(p)
    _add_input(p)
    _add_scoring(p)
    _add_out(p)

    p = sub.add_parser("sweep", help="rejection counts over a grid of epsilon values")
    _add_input(p, epsilon=False)
    p.add_argument("--grid", type=_float_list, required=True, help="ascending epsilons, comma-separated")
    _add_scoring(p)
    _add_out(p)

    p = sub.add_parser("eigenmap", help="coordinates from the lowest eigen-cochains of L^(q)")
    _add_complex(p)
    _add_input(p)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--m", type=int, default=2, help="number of eigenvectors")
    p.add_argument("--skip", type=int, default=0,
                   help="leading eigenvectors to drop (1 drops the constant vector at q=0)")
    p.add_argument("--parts", choices=["both", "up", "down"], default="both")
    _add_out(p)

    p = sub.add_parser("export", help="1-skeleton as DOT or JSON edge list")
    _add_complex(p)
    _add_input(p)
    p.add_argument("--format", choices=["dot", "json"], default="dot")
    _add_out(p)
    return parser


# ---------------------------------------------------------------- helpers


def _distances(args):
    if not args.input:
        raise UsageError("--input is required")
    if args.metric == "precomputed":
        return io.read_distance_matrix(args.input)
    return compute_distances(io.read_points(args.input), args.metric)


def _complex(args, default_max_dim):
    scheme = weight_scheme(args.weights)
    if getattr(args, "complex", None):
        if args.input:
            raise UsageError("give either --complex or --input, not both")
        return io.load_complex(args.complex, scheme)
    if args.epsilon is None:
        raise UsageError("--epsilon is required unless --complex is given")
    if args.epsilon <= 0:
        raise UsageError("--epsilon must be > 0")
    max_dim = default_max_dim if args.max_dim is None else args.max_dim
    if max_dim < 0:
        raise UsageError("--max-dim must be >= 0")
    k = build_vietoris_rips(_distances(args), args.epsilon, max_dim)
    return compute_weights(k, scheme)


def _features(args, n_samples):
    if bool(args.features) == bool(args.pair_features):
        raise UsageError("give exactly one of --features or --pair-features")
    if args.features:
        return io.read_point_features(args.features)
    fs = io.read_pair_features(args.pair_features, n_samples)
    if args.q != 1:
        raise UsageError("2-point features induce 1-cochains; use --q 1")
    return fs


def _config(args):
    if args.permutations < 1:
        raise UsageError("--permutations must be >= 1")
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    if args.seed < 0:
        raise UsageError("--seed must be >= 0")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    if args.q < 0:
        raise UsageError("--q must be >= 0")
    return PermutationConfig(args.permutations, args.seed, args.alpha)


def _write(args, text):
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- commands


def cmd_build(args):
    k = _complex(args, 2)
    counts = k.counts()
    print("simplices per dimension: " + " ".join(f"{q}:{c}" for q, c in enumerate(counts)), file=sys.stderr)
    _write(args, io.dump_complex(k))


def cmd_score(args):
    cfg = _config(args)
    k = _complex(args, args.q + 1)
    fs = _features(args, k.vertex_count)
    log.info("scoring %d features at q=%d on %s simplices", len(fs), args.q, k.counts())
    report = score_report(k, fs, args.q, cfg, args.agg, args.parts, args.threads, weight_scheme=args.weights)
    log.info("%d features rejected at alpha=%g", report.n_rejected, cfg.alpha)
    _write(args, report.to_tsv())


def cmd_sweep(args):
    cfg = _config(args)
    if not args.grid:
        raise UsageError("--grid is empty")
    if any(b <= a for a, b in zip(args.grid, args.grid[1:])) or args.grid[0] <= 0:
        raise UsageError("--grid must be positive and strictly ascending")
    dist = _distances(args)
    fs = _features(args, dist.shape[0])
    max_dim = args.q + 1 if args.max_dim is None else args.max_dim
    result = sweep_epsilon(dist, fs, args.q, args.grid, cfg, max_dim, weight_scheme(args.weights),
                           args.agg, args.parts, args.threads)
    for row in result.rows:
        if row.diagnostic:
            print(f"epsilon={row.epsilon!r}: {row.diagnostic}", file=sys.stderr)
    print(f"best epsilon: {result.best_epsilon!r}", file=sys.stderr)
    _write(args, result.to_tsv())


def cmd_eigenmap(args):
    k = _complex(args, args.q + 1)
    size = k.n_simplices(args.q)
    if size == 0:
        raise UsageError(f"the complex has no {args.q}-simplices")
    if args.skip < 0:
        raise UsageError("--skip must be >= 0")
    if not 1 <= args.m <= size - args.skip:
        raise UsageError(f"--m must lie in [1, {size - args.skip}] for q={args.q} with --skip {args.skip}")
    Y = eigenmap(k, args.q, args.m, args.parts, args.skip)
    _write(args, io.eigenmap_tsv(k, args.q, Y))


def cmd_export(args):
    k = _complex(args, 1)
    _write(args, io.skeleton_dot(k) if args.format == "dot" else io.skeleton_json(k))


COMMANDS = {
    "build": cmd_build,
    "score": cmd_score,
    "sweep": cmd_sweep,
    "eigenmap": cmd_eigenmap,
    "export": cmd_export,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"clscore {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ClscoreError, OSError, ValueError) as exc:
        print(f"clscore {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
