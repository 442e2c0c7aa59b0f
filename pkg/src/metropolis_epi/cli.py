"""Command-line driver.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import _backend
from .config import KEYS, RunConfig, parse_config
from .errors import ConfigError, DataError, MetropolisError, NumericalError
from .estimands import DEFAULT_INCIDENCE, TwoByTwo, bootstrap_mle, calibrate_offset, mle_2x2, risk_difference
from .fileio import bundled_data_path, load_dataset, read_chain_csv, write_chain_csv, write_trace_svg
from .report import comparison_rows, format_tsv, published_row, summary_row
from .sampler import Variant, run_chain, two_state_chain
from .target import LogisticPosterior

log = logging.getLogger("metropolis_epi")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _flag(key: str) -> str:
    return "--" + key.replace(".", "-").replace("_", "-")


def _dest(key: str) -> str:
    return "cfg_" + key.replace(".", "_")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="metropolis-epi", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="sample the posterior and write chains, summary and trace plots")
    run.add_argument("--config", type=Path, help="key = value configuration file")
    for key in KEYS:
        run.add_argument(_flag(key), dest=_dest(key), metavar=key.upper().replace(".", "_"),
                         help=f"override config key '{key}'")
    run.add_argument("--compare", action="store_true",
                     help="run all three variants (seeds seed, seed+1, seed+2) and tabulate them")
    run.add_argument("--backend", choices=_backend.BACKENDS, default="auto")

    mle = sub.add_parser("mle", help="closed-form maximum likelihood for the 2x2 table")
    mle.add_argument("--data", type=Path)
    mle.add_argument("--incidence", type=float, default=DEFAULT_INCIDENCE)
    mle.add_argument("--exposure-prevalence", type=float)

    boot = sub.add_parser("bootstrap", help="stratified bootstrap of the maximum likelihood fit")
    boot.add_argument("--data", type=Path)
    boot.add_argument("--b", type=int, default=1000, help="number of resamples")
    boot.add_argument("--seed", type=int, default=2021)
    boot.add_argument("--incidence", type=float, default=DEFAULT_INCIDENCE)
    boot.add_argument("--exposure-prevalence", type=float)

    two = sub.add_parser("demo-two-state", help="Metropolis on two states with mass ratio h(b)/h(a)")
    two.add_argument("--ratio", type=float, default=2.0)
    two.add_argument("--steps", type=int, default=100_000)
    two.add_argument("--seed", type=int, default=2021)

    summ = sub.add_parser("summarize", help="recompute summary statistics from a chain CSV")
    summ.add_argument("chain", type=Path)
    summ.add_argument("--method", default=None, help="label for the summary row")
    summ.add_argument("--data", type=Path, help="dataset (for the default exposure prevalence and fixed offsets)")
    summ.add_argument("--incidence", type=float, default=DEFAULT_INCIDENCE)
    summ.add_argument("--exposure-prevalence", type=float)
    summ.add_argument("--rd-offset", choices=("per-draw", "fixed"), default="per-draw")
    summ.add_argument("--backend", choices=_backend.BACKENDS, default="auto",
                      help="use the backend the run used for bit-exact re-derivation")
    return p


def _load(path):
    return load_dataset(path if path is not None else bundled_data_path())


def _prevalence(explicit, data) -> float:
    if explicit is not None:
        return explicit
    return TwoByTwo.from_dataset(data).control_exposure_prevalence


def _reference_beta(mode, data):
    return mle_2x2(TwoByTwo.from_dataset(data)).beta if mode == "fixed" else None


def _run_one(target, cfg: RunConfig, variant: Variant, seed: int, backend: str):
    t0 = time.perf_counter()
    chain = run_chain(target, cfg.sampler_config(variant=variant, seed=seed), cfg.init, backend=backend)
    return chain, time.perf_counter() - t0


def cmd_run(args) -> int:
    text = args.config.read_text() if args.config else ""
    overrides = {key: getattr(args, _dest(key)) for key in KEYS if getattr(args, _dest(key)) is not None}
    cfg = parse_config(text, overrides)
    data = _load(cfg.data)
    target = LogisticPosterior(data, cfg.prior)
    p1 = _prevalence(cfg.exposure_prevalence, data)
    reference = _reference_beta(cfg.rd_offset, data)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.compare:
        jobs = [(v, cfg.seed + i) for i, v in enumerate(Variant)]
    else:
        jobs = [(cfg.variant, cfg.seed)]
    # the compiled kernel releases the GIL, so threads run chains in parallel
    with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        results = list(pool.map(lambda job: _run_one(target, cfg, job[0], job[1], args.backend), jobs))

    rows, comparison, info = [], [], []
    for (variant, seed), (chain, elapsed) in zip(jobs, results):
        vdir = out / variant.value if args.compare else out
        vdir.mkdir(parents=True, exist_ok=True)
        B = chain.config.burnin
        write_chain_csv(vdir / "chain.csv", chain.draws, chain.log_posts, chain.accepted, first_iteration=B + 1)
        write_chain_csv(vdir / "burnin.csv", chain.burnin_draws, chain.burnin_log_posts, chain.burnin_accepted)
        iters = np.arange(B + 1, B + 1 + len(chain))
        for k, name in enumerate(("beta0", "beta1")):
            write_trace_svg(vdir / f"trace_{name}.svg", iters, chain.draws[:, k], name,
                            thin=cfg.thin, window=cfg.window)
        row = summary_row(variant.value, chain.draws, chain.log_posts, chain.accepted, cfg.incidence, p1,
                          cfg.rd_offset, reference, backend=args.backend)
        rows.append(row)
        published = published_row(variant.value, cfg.prior, data)
        if published is not None:
            comparison += comparison_rows(row, published)
        info.append({
            "method": variant.value, "seed": seed, "backend": chain.backend, "wall_seconds": elapsed,
            "acceptance_rate": chain.acceptance_rate, "exposure_prevalence": p1,
            "final_cov": " ".join(repr(float(v)) for v in chain.proposal_cov.ravel()),
        })
        log.info("%s: %d draws in %.3fs (%s backend)", variant.value, len(chain), elapsed, chain.backend)

    (out / "summary.tsv").write_text(format_tsv(rows))
    (out / "config.txt").write_text(cfg.to_text())
    (out / "run_info.tsv").write_text(format_tsv(info, columns=tuple(info[0])))
    if comparison:
        (out / "comparison.tsv").write_text(format_tsv(comparison, columns=("source",) + tuple(rows[0])))
    sys.stdout.write(format_tsv(rows))
    return EXIT_OK


def cmd_mle(args) -> int:
    data = _load(args.data)
    table = TwoByTwo.from_dataset(data)
    fit = mle_2x2(table)
    p1 = _prevalence(args.exposure_prevalence, data)
    delta = calibrate_offset(fit.beta, args.incidence, p1)
    lo, hi = fit.wald_ci()
    row = {
        "method": "maximum-likelihood", "beta0": float(fit.beta[0]), "beta1": float(fit.beta[1]),
        "se_beta1": fit.se_beta1, "or": fit.odds_ratio, "or_lo": lo, "or_hi": hi,
        "offset": delta, "rd_x1000": risk_difference(fit.beta, delta) * 1000.0,
    }
    sys.stdout.write(format_tsv([row], columns=tuple(row)))
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    data = _load(args.data)
    table = TwoByTwo.from_dataset(data)
    rep = bootstrap_mle(table, args.b, args.seed, args.incidence, _prevalence(args.exposure_prevalence, data))
    row = {
        "resamples": rep.resamples, "separated": rep.separated, "separated_fraction": rep.separated_fraction,
        "or_lo": rep.or_ci[0], "or_hi": rep.or_ci[1],
        "rd_lo_x1000": rep.rd_ci[0] * 1000.0, "rd_hi_x1000": rep.rd_ci[1] * 1000.0,
        "ci_reliable": "yes" if rep.reliable else "no",
    }
    sys.stdout.write(format_tsv([row], columns=tuple(row)))
    if not rep.reliable:
        print(f"warning: {rep.separated}/{rep.resamples} resamples had a zero cell (separation); "
              "the percentile intervals exclude them and are not reliable", file=sys.stderr)
    return EXIT_OK


def cmd_demo_two_state(args) -> int:
    if args.steps < 1 or not args.ratio > 0:
        raise ConfigError("--ratio must be positive and --steps >= 1")
    freq = two_state_chain(args.ratio, args.steps, np.random.default_rng(args.seed))
    row = {"ratio": args.ratio, "steps": args.steps, "seed": args.seed, "freq_b": freq,
           "expected": args.ratio / (1.0 + args.ratio)}
    sys.stdout.write(format_tsv([row], columns=tuple(row)))
    return EXIT_OK


def cmd_summarize(args) -> int:
    chain = read_chain_csv(args.chain)
    data = _load(args.data)
    p1 = _prevalence(args.exposure_prevalence, data)
    method = args.method or args.chain.parent.name or "chain"
    row = summary_row(method, chain["draws"], chain["log_posts"], chain["accepted"], args.incidence, p1,
                      args.rd_offset, _reference_beta(args.rd_offset, data), backend=args.backend)
    sys.stdout.write(format_tsv([row]))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "mle": cmd_mle,
    "bootstrap": cmd_bootstrap,
    "demo-two-state": cmd_demo_two_state,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MetropolisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
