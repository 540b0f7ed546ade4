"""
figures.py
One function per figure id. Each takes a merged config dict, an output directory
and a worker count, writes <figure>.csv and <figure>.svg, and returns a FigureOutput.
"""

import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .bounds import (TolerancePair, gaussian_necessary_min_n, phi, unit_with_replacement_bound,
                     unit_without_replacement_bound)
from .config import ConfigError, parse_generator
from .generators import AllOnes, DecayingRankOne, DiagonalSkewed, ScaledProjection
from .harness import (FigureOutput, FigureRow, TrialPool, first_passage_study, min_sample_size,
                      success_probability, write_csv)
from .kinds import Method
from .linop import DiagonalOperator, ImplicitOperator
from .logger import logger
from .plotting import HistogramPanel, HLine, LinePanel, Series, VLine, save_svg
from .shortcuts.lines import dotted_black_line, dotted_red_line, necessary_line
from .stats import diagnose


def _paths(out_dir: Path, figure: str) -> Tuple[Path, Path]:
    return out_dir / f"{figure}.csv", out_dir / f"{figure}.svg"


def _methods(names) -> List[Method]:
    try:
        return [Method.parse(name) for name in names]
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _nan(value: Optional[int]) -> float:
    return math.nan if value is None else float(value)


def all_ones_figure(config: Dict, out_dir: Path, workers: int) -> FigureOutput:
    """
    Per-trial first-passage N on the all-ones matrix. The best `keep` of
    `trials` trials are plotted in increasing order.
    """
    figure = "all1s"
    n, eps, trials, keep = config["n"], config["eps"], config["trials"], config["keep"]
    op = AllOnes(n=n).generate()
    rows, series, summary = [], [], {}
    with TrialPool(op, workers) as pool:
        for method in _methods(config["methods"]):
            passages = first_passage_study(op, method, eps, trials=trials, master_seed=config["seed"],
                                           N_max=config["N_max"], pool=pool)
            ordered = sorted(passages, key=lambda v: math.inf if v is None else v)[:keep]
            for position, N in enumerate(ordered, start=1):
                rows.append(FigureRow(figure=figure, method=method.value, n=n, rank=1,
                                      theta_or_param=position, N=N, trials=trials, eps=eps,
                                      seed=config["seed"]))
            finite = [v for v in passages if v is not None]
            summary[f"{method.value}_mean_N"] = float(np.mean(finite)) if finite else math.nan
            summary[f"{method.value}_max_N"] = float(max(finite)) if finite else math.nan
            summary[f"{method.value}_censored"] = float(len(passages) - len(finite))
            series.append(Series.for_method(method.value, method.label, range(1, len(ordered) + 1),
                                            [_nan(v) for v in ordered]))
    csv_path, svg_path = _paths(out_dir, figure)
    write_csv(csv_path, rows)
    save_svg([LinePanel(series, title=f"All ones, n={n}, eps={eps}", xlabel="trial (sorted)",
                        ylabel="N", logy=True)], svg_path)
    return FigureOutput(figure, csv_path, svg_path, rows, summary)


def thetas_figure(config: Dict, out_dir: Path, workers: int) -> FigureOutput:
    """Minimal N versus theta for the rank-one matrix built from x_j = exp(-j theta)."""
    figure = "thetas"
    n = config["n"]
    tol = TolerancePair(config["eps"], config["delta"])
    methods = _methods(config["methods"])
    rows = []
    curves: Dict[Method, List[float]] = {method: [] for method in methods}
    for theta in config["thetas"]:
        op = DecayingRankOne(n=n, theta=theta).generate()
        with TrialPool(op, workers) as pool:
            for method in methods:
                result = min_sample_size(op, method, tol, trials=config["trials"], master_seed=config["seed"],
                                         N_max=config["N_max"], pool=pool)
                curves[method].append(_nan(result.N_star))
                rows.append(_min_n_row(figure, result, n=n, rank=1, param=theta, tol=tol,
                                       trials=config["trials"], seed=config["seed"]))
    csv_path, svg_path = _paths(out_dir, figure)
    write_csv(csv_path, rows)
    series = [Series.for_method(m.value, m.label, config["thetas"], curves[m]) for m in methods]
    save_svg([LinePanel(series, title=f"Rank one, n={n}, eps=delta={tol.eps}", xlabel="theta",
                        ylabel="N", logx=True, logy=True)], svg_path)
    summary = {f"{m.value}_max_N": float(np.nanmax(curves[m])) if not np.all(np.isnan(curves[m])) else math.nan
               for m in methods}
    return FigureOutput(figure, csv_path, svg_path, rows, summary)


def _min_n_row(figure: str, result, n: int, rank: Optional[int], param: Optional[float],
               tol: TolerancePair, trials: int, seed: int) -> FigureRow:
    record = None if result.censored else result.record_at(result.N_star)
    if record is None:
        return FigureRow(figure=figure, method=result.method.value, n=n, rank=rank, theta_or_param=param,
                         N=None, trials=trials, eps=tol.eps, delta=tol.delta, seed=seed)
    return FigureRow.from_record(figure, record, rank=rank, theta_or_param=param)


def equal_eigenvalue_operator(kind: str, n: int, r: int, seed: int) -> ImplicitOperator:
    """Rank r, trace 1, all nonzero eigenvalues 1/r: diagonal or rotated."""
    if kind == "diag":
        return DiagonalSkewed(n=n, r=r, skew=0.0).generate()
    if kind == "projection":
        return ScaledProjection(n=n, r=r, seed=seed).generate()
    raise ConfigError(f"matrix must be 'diag' or 'projection', but received: {kind}")


def necessary_rank_figure(config: Dict, out_dir: Path, workers: int) -> FigureOutput:
    """
    Left: necessary Gaussian N versus rank with n as reference. Right: empirical
    Gaussian success probability against 1 - phi(eps, N r) on equal-eigenvalue matrices.
    """
    figure = "nec-rank"
    tol = TolerancePair(config["eps"], config["delta"])
    rows = []
    ranks = config["ranks"]
    necessary = [gaussian_necessary_min_n(r, tol) for r in ranks]
    for r, N in zip(ranks, necessary):
        rows.append(FigureRow(figure=figure, method="necessary", n=config["n_reference"], rank=r, N=N,
                              eps=tol.eps, delta=tol.delta))
    left = LinePanel([Series("Necessary N", ranks, necessary, dict(necessary_line))],
                     title=f"eps=delta={tol.eps}", xlabel="rank", ylabel="N", logx=True, logy=True,
                     statics=[HLine(config["n_reference"], label=f"n={config['n_reference']}")])

    tight = TolerancePair(config["tight_eps"], config["tight_delta"])
    n = config["tight_n"]
    series = []
    markers = [HLine(1.0 - tight.delta, label="1 - delta")]
    for r in config["tight_ranks"]:
        op = equal_eigenvalue_operator(config["matrix"], n, r, config["seed"])
        N_nec = gaussian_necessary_min_n(r, tight)
        markers.append(VLine(N_nec, label=f"necessary N r={r}"))
        grid = list(range(1, max(2 * N_nec, config["N_points"]) + 1))
        empirical, analytic = [], []
        with TrialPool(op, workers) as pool:
            for N in grid:
                record = success_probability(op, Method.GAUSSIAN, N, tight, trials=config["trials"],
                                             master_seed=config["seed"], pool=pool)
                empirical.append(record.success_prob)
                analytic.append(1.0 - phi(tight.eps, N * r))
                rows.append(FigureRow.from_record(figure, record, rank=r, theta_or_param=float(N_nec)))
                rows.append(FigureRow(figure=figure, method="necessary", n=n, rank=r, theta_or_param=float(N_nec),
                                      N=N, success_prob=analytic[-1], eps=tight.eps, delta=tight.delta))
        series.append(Series.for_method("gaussian", f"Gaussian r={r}", grid, empirical))
        series.append(Series(f"1 - phi r={r}", grid, analytic,
                             dict(dotted_black_line if len(series) < 2 else dotted_red_line)))
    right = LinePanel(series, title=f"n={n}, eps=delta={tight.eps}", xlabel="N", ylabel="success probability",
                      statics=markers)
    csv_path, svg_path = _paths(out_dir, figure)
    write_csv(csv_path, rows)
    save_svg([left, right], svg_path)
    summary = {f"necessary_N_r{r}": float(N) for r, N in zip(ranks, necessary)}
    return FigureOutput(figure, csv_path, svg_path, rows, summary)


def randsamp_bounds_figure(config: Dict, out_dir: Path, workers: int) -> FigureOutput:
    """Both unit-vector bounds as functions of K_U. Analytic, no sampling."""
    figure = "randsamp-bounds"
    n = config["n"]
    tol = TolerancePair(config["eps"], config["delta"])
    grid = np.linspace(0.0, config["ku_max"], config["points"])
    with_repl = [unit_with_replacement_bound(float(k), tol) for k in grid]
    without_repl = [unit_without_replacement_bound(float(k), n, tol) for k in grid]
    rows = []
    for k, a, b in zip(grid, with_repl, without_repl):
        rows.append(FigureRow(figure=figure, method=Method.UNIT_WITH_REPLACEMENT.value, n=n,
                              theta_or_param=float(k), N=a, eps=tol.eps, delta=tol.delta))
        rows.append(FigureRow(figure=figure, method=Method.UNIT_WITHOUT_REPLACEMENT.value, n=n,
                              theta_or_param=float(k), N=b, eps=tol.eps, delta=tol.delta))
    series = [Series.for_method("unit", Method.UNIT_WITH_REPLACEMENT.label, grid, with_repl),
              Series.for_method("unit-noreplace", Method.UNIT_WITHOUT_REPLACEMENT.label, grid, without_repl)]
    csv_path, svg_path = _paths(out_dir, figure)
    write_csv(csv_path, rows)
    save_svg([LinePanel(series, title=f"n={n}, eps=delta={tol.eps}", xlabel="K_U", ylabel="N",
                        logy=True, statics=[HLine(n, label=f"n={n}")])], svg_path)
    return FigureOutput(figure, csv_path, svg_path, rows, {})


def convergence_figure(config: Dict, out_dir: Path, workers: int) -> FigureOutput:
    """Success probability against N for every method until each reaches 1 - delta."""
    figure = "convergence"
    spec = parse_generator(config["generator"], seed=config["seed"])
    op = spec.generate()
    tol = TolerancePair(config["eps"], config["delta"])
    trace = op.exact_trace()
    rows, series, summary = [], [], {}
    with TrialPool(op, workers) as pool:
        for method in _methods(config["methods"]):
            result = min_sample_size(op, method, tol, trials=config["trials"], master_seed=config["seed"],
                                     N_max=config["N_max"], trace=trace, pool=pool)
            history = sorted(result.probe_history, key=lambda rec: rec.N)
            for record in history:
                rows.append(FigureRow.from_record(figure, record, rank=op.rank_hint))
            series.append(Series.for_method(method.value, method.label, [rec.N for rec in history],
                                            [rec.success_prob for rec in history]))
            summary[f"{method.value}_N_star"] = _nan(result.N_star)
    csv_path, svg_path = _paths(out_dir, figure)
    write_csv(csv_path, rows)
    save_svg([LinePanel(series, title=spec.describe(), xlabel="N", ylabel="success probability",
                        statics=[HLine(1.0 - tol.delta, label="1 - delta")])], svg_path)
    return FigureOutput(figure, csv_path, svg_path, rows, summary)


def k_distributions_figure(config: Dict, out_dir: Path, workers: int) -> FigureOutput:
    """Histograms of K_H^j, the pairwise K_U^(i,j) and the eigenvalue shares K_G^j."""
    figure = "k-distributions"
    spec = parse_generator(config["generator"], seed=config["seed"])
    op = spec.generate()
    diagnostics = diagnose(op, materialize=True, seed=config["seed"], bins=config["bins"])
    if diagnostics.spectrum_ratio_per_eig is None:
        raise ConfigError(f"k-distributions needs the eigenvalue oracle, unavailable for n={op.dim}")
    per_column = diagnostics.k_h_per_column
    if config["k_h_cap"] > 0:
        per_column = per_column[per_column <= config["k_h_cap"]]
    kh_counts, kh_edges = np.histogram(per_column, bins=config["bins"])
    eig_counts, eig_edges = np.histogram(diagnostics.spectrum_ratio_per_eig, bins=config["bins"])
    ku = diagnostics.k_u_pairs
    rows = []
    for name, edges, counts in (("k_h", kh_edges, kh_counts), ("k_u", ku.edges, ku.counts),
                                ("eig", eig_edges, eig_counts)):
        for left, count in zip(edges[:-1], counts):
            rows.append(FigureRow(figure=figure, method=name, n=op.dim, rank=diagnostics.rank_estimate,
                                  theta_or_param=float(left), N=int(count), seed=config["seed"]))
    panels = [
        HistogramPanel(kh_edges, kh_counts, title=f"K_H^j (K_H={diagnostics.k_h:.4g})", xlabel="K_H^j"),
        HistogramPanel(ku.edges, ku.counts, title=f"K_U^(i,j) (K_U={diagnostics.k_u:.4g})", xlabel="K_U^(i,j)"),
        HistogramPanel(eig_edges, eig_counts, title=f"Eigenvalues (K_G={diagnostics.k_g:.4g})",
                       xlabel="lambda_j / tr(A)", logy=True),
    ]
    csv_path, svg_path = _paths(out_dir, figure)
    write_csv(csv_path, rows)
    save_svg(panels, svg_path, suptitle=spec.describe())
    summary = {"k_h": diagnostics.k_h, "k_g": diagnostics.k_g, "k_u": diagnostics.k_u,
               "rank": float(diagnostics.rank_estimate) if diagnostics.rank_estimate is not None else math.nan}
    return FigureOutput(figure, csv_path, svg_path, rows, summary)


def fixed_kg_diagonal(n: int, r: int, k_g: float) -> DiagonalOperator:
    """Diagonal, trace 1, rank r, largest eigenvalue k_g and the other r - 1 equal."""
    if not 1.0 / r <= k_g <= 1.0:
        raise ConfigError(f"K_G={k_g} is not reachable at rank {r}: need 1/r <= K_G <= 1")
    diag = np.zeros(n)
    diag[0] = k_g
    if r > 1:
        diag[1:r] = (1.0 - k_g) / (r - 1)
    return DiagonalOperator(diag, rank_hint=r)


def rank_kg_figure(config: Dict, out_dir: Path, workers: int) -> FigureOutput:
    """Gaussian minimal N against rank at fixed K_G, and against K_G at fixed rank."""
    figure = "rank-kg"
    n = config["n"]
    tol = TolerancePair(config["eps"], config["delta"])
    trials, seed, N_max = config["trials"], config["seed"], config["N_max"]
    rows = []

    def gaussian_min_n(op: ImplicitOperator, rank: int, k_g: float) -> float:
        with TrialPool(op, workers) as pool:
            result = min_sample_size(op, Method.GAUSSIAN, tol, trials=trials, master_seed=seed, N_max=N_max,
                                     pool=pool)
        rows.append(_min_n_row(figure, result, n=n, rank=rank, param=k_g, tol=tol, trials=trials, seed=seed))
        return _nan(result.N_star)

    ranks = config["ranks"]
    necessary = {r: gaussian_necessary_min_n(r, tol) for r in set(ranks) | set(config["skew_ranks"])}
    for r in sorted(necessary):
        rows.append(FigureRow(figure=figure, method="necessary", n=n, rank=r, N=necessary[r],
                              eps=tol.eps, delta=tol.delta))

    left_series = []
    for k_g in config["kgs"]:
        reachable = [r for r in ranks if k_g >= 1.0 / r]
        values = [gaussian_min_n(fixed_kg_diagonal(n, r, k_g), r, k_g) for r in reachable]
        left_series.append(Series.for_method("gaussian", f"Gaussian K_G={k_g}", reachable, values))
        left_series[-1].params["linestyle"] = "-" if len(left_series) == 1 else "--"
    left_series.append(Series("Necessary", ranks, [necessary[r] for r in ranks], dict(necessary_line)))

    right_series = []
    for r in config["skew_ranks"]:
        k_gs, values = [], []
        for skew in config["skews"]:
            spec = DiagonalSkewed(n=n, r=r, skew=skew)
            k_g = float(spec.eigenvalues()[0])
            k_gs.append(k_g)
            values.append(gaussian_min_n(spec.generate(), r, k_g))
        right_series.append(Series.for_method("gaussian", f"Gaussian r={r}", k_gs, values))
        right_series[-1].params["linestyle"] = "-" if len(right_series) == 1 else "--"
        right_series.append(Series(f"Necessary r={r}", k_gs, [necessary[r]] * len(k_gs),
                                   dict(dotted_black_line)))

    csv_path, svg_path = _paths(out_dir, figure)
    write_csv(csv_path, rows)
    save_svg([LinePanel(left_series, title=f"n={n}, eps=delta={tol.eps}", xlabel="rank", ylabel="N",
                        logx=True, logy=True),
              LinePanel(right_series, title="Skewed diagonal", xlabel="K_G", ylabel="N", logy=True)], svg_path)
    logger.info(f"rank-kg: {len(rows)} rows")
    return FigureOutput(figure, csv_path, svg_path, rows, {})


FIGURES: Dict[str, Callable[[Dict, Path, int], FigureOutput]] = {
    "all1s": all_ones_figure,
    "thetas": thetas_figure,
    "nec-rank": necessary_rank_figure,
    "randsamp-bounds": randsamp_bounds_figure,
    "convergence": convergence_figure,
    "k-distributions": k_distributions_figure,
    "rank-kg": rank_kg_figure,
}
