"""Name-to-model factory used by the benchmark harness and the CLI."""

from __future__ import annotations

from .baselines import (
    BatchLeastSquares,
    LmsFilter,
    MiniBatchGd,
    OnlineLasso,
    OnlineRegressor,
    OnlineRidge,
    PassiveAggressive,
    PaVariant,
    RecursiveLeastSquares,
    RegressorConfig,
    SgdRegressor,
)
from .regressor import OlrWa, OlrWaConfig, WeightMode, WeightScheme

_BASELINES = {
    "sgd": SgdRegressor,
    "lasso": OnlineLasso,
    "ridge": OnlineRidge,
    "mbgd": MiniBatchGd,
    "lms": LmsFilter,
    "rls": RecursiveLeastSquares,
    "pa": PassiveAggressive,
    "batch": BatchLeastSquares,
}

_BASELINE_KEYS = {
    "learning_rate",
    "epochs",
    "reg_lambda",
    "batch_size",
    "forgetting",
    "init_delta",
    "aggressiveness",
    "epsilon_tube",
    "pa_variant",
    "use_bias",
    "replay",
}

_OLRWA_KEYS = {
    "weights",
    "w_base",
    "w_inc",
    "base_fraction",
    "base_count",
    "user_batch",
    "batch_multiplier",
    "sample_size_factor",
    "rng_seed",
}

MODEL_NAMES = tuple(sorted(_BASELINES)) + ("olrwa",)


def _check_keys(name: str, params: dict, allowed: set) -> None:
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"unknown parameter(s) for {name}: {sorted(unknown)}")


def _weight_scheme(params: dict) -> WeightScheme:
    mode = WeightMode(params.get("weights", "equal"))
    explicit = {k: float(params[k]) for k in ("w_base", "w_inc") if k in params}
    if mode is WeightMode.EQUAL:
        w = explicit.get("w_base", explicit.get("w_inc", 0.5))
        return WeightScheme(mode, w, w)
    defaults = {
        WeightMode.DYNAMIC: (0.01, 0.01),
        WeightMode.TIME_BASED: (0.1, 2.0),
        WeightMode.CONFIDENCE_BASED: (2.0, 0.1),
        WeightMode.CUSTOM: (0.5, 0.5),
    }[mode]
    return WeightScheme(
        mode,
        explicit.get("w_base", defaults[0]),
        explicit.get("w_inc", defaults[1]),
    )


def make_regressor(
    name: str, params: dict | None = None, run_seed: int | None = None
) -> OnlineRegressor:
    """Build a fresh model by registry name.

    ``run_seed`` overrides the stochastic model's RNG seed; the harness
    derives it per (seed, fold, model) so every run is reproducible.
    """
    params = dict(params or {})
    if name == "olrwa":
        _check_keys(name, params, _OLRWA_KEYS)
        seed = run_seed if run_seed is not None else int(params.get("rng_seed", 0))
        config = OlrWaConfig(
            weight_scheme=_weight_scheme(params),
            base_fraction=float(params.get("base_fraction", 0.1)),
            base_count=(
                int(params["base_count"]) if params.get("base_count") is not None
                else None
            ),
            user_batch=int(params.get("user_batch", 1)),
            batch_multiplier=int(params.get("batch_multiplier", 5)),
            sample_size_factor=int(params.get("sample_size_factor", 1)),
            rng_seed=seed,
        )
        return OlrWa(config)
    if name not in _BASELINES:
        raise ValueError(f"unknown model {name!r}; choose from {MODEL_NAMES}")
    _check_keys(name, params, _BASELINE_KEYS)
    if "pa_variant" in params and not isinstance(params["pa_variant"], PaVariant):
        params["pa_variant"] = PaVariant(str(params["pa_variant"]).upper())
    return _BASELINES[name](RegressorConfig(**params))
