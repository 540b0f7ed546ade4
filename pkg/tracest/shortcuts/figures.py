# Figure presets at desk scale. Keys are the settings each figure accepts;
# config files and CLI flags override them by name.

all1s = {
    "n": 10000,
    "eps": 0.05,
    "trials": 100,
    "keep": 90,
    "N_max": 10000,
    "methods": ["hutchinson", "gaussian", "unit"],
    "seed": 0,
}

thetas = {
    "n": 1000,
    "eps": 0.2,
    "delta": 0.2,
    "thetas": [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0],
    "trials": 100,
    "N_max": 2000,
    "methods": ["hutchinson", "gaussian", "unit-noreplace"],
    "seed": 0,
}

nec_rank = {
    # Analytic panel
    "ranks": [1, 2, 5, 10, 20, 30, 50, 100, 200, 500, 1000],
    "eps": 0.02,
    "delta": 0.02,
    "n_reference": 1000,
    # Tightness panel
    "tight_ranks": [100, 400],
    "tight_n": 2000,
    "tight_eps": 0.1,
    "tight_delta": 0.1,
    "N_points": 12,
    "matrix": "diag",
    "trials": 500,
    "seed": 0,
}

randsamp_bounds = {
    "n": 1000,
    "eps": 0.05,
    "delta": 0.05,
    "ku_max": 3.0,
    "points": 61,
}

convergence = {
    "generator": "gram-gaussian:n=200,m=40",
    "eps": 0.05,
    "delta": 0.05,
    "trials": 200,
    "N_max": 2000,
    "methods": ["hutchinson", "gaussian", "unit", "unit-noreplace"],
    "seed": 0,
}

k_distributions = {
    "generator": "gram-gaussian:n=1000,m=200",
    "bins": 40,
    # 0 keeps every K_H^j, otherwise only K_H^j <= k_h_cap
    "k_h_cap": 0.0,
    "seed": 0,
}

rank_kg = {
    "n": 1000,
    "eps": 0.05,
    "delta": 0.05,
    # Rank sweep at fixed K_G
    "ranks": [10, 20, 50, 100, 200],
    "kgs": [0.1, 0.2],
    # Skew sweep at fixed rank
    "skew_ranks": [50, 200],
    "skews": [0.0, 1.0, 2.0, 4.0, 8.0],
    "trials": 200,
    "N_max": 10000,
    "seed": 0,
}

PRESETS = {
    "all1s": all1s,
    "thetas": thetas,
    "nec-rank": nec_rank,
    "randsamp-bounds": randsamp_bounds,
    "convergence": convergence,
    "k-distributions": k_distributions,
    "rank-kg": rank_kg,
}
