"""Command-line front door: named experiments from config files or flags.

Configs are `key = value` lines with `#` comments and comma-separated
lists; command-line flags override file values.  Parsing is strict: an
unknown, duplicate, or missing required key is fatal, because a silently
ignored typo in an experiment parameter corrupts conclusions downstream.

Every result file opens with a provenance block (command, config hash,
seed, the full resolved configuration, wall time).  Payloads are
byte-reproducible for a fixed config; only the wall-time line varies.
Exit status: 0 success, 2 configuration error, 3 finished-but-partial
(divergence above max_diverged_fraction; results are written and flagged).
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .convergence import (
    CONVERGENCE_ROW_HEADER,
    ConvergenceConfig,
    GradientNoise,
    default_gamma,
    estimate_sigma_gamma,
    fitted_rate_slope,
    run_convergence,
)
from .datasets import DatasetSplit, load_mnist_idx, synthetic_blobs
from .errors import ConfigError, DegenerateInputError, ParameterError, ShapeError
from .metastability import solved_model
from .mlp import LOSS_KINDS, init_mlp
from .objectives import double_well, quadratic
from .rng import RngStream
from .sde import EXIT_RECORD_HEADER, TRANSITION_RECORD_HEADER
from .stability import STABILITY_REPORT_HEADER, stability_condition
from .stable import StableParams, sample_sas
from .studies import (
    EXIT_STUDY_HEADER,
    TRANSITION_STUDY_HEADER,
    exit_time_study,
    transition_study,
)
from .tail_index import TAIL_ESTIMATE_HEADER, choose_block_size, estimate_alpha
from .training import (
    SWEEP_CELL_HEADER,
    SWEEP_GROUP_HEADER,
    InjectedNoise,
    noise_scale_sweep,
    train_log_header,
    train_with_tail_logging,
)

OUT_DIR_ENV = "LEVYLAB_OUT"

_REQUIRED = object()

# key -> (kind, default); kinds: int float str bool list_int list_float
_COMMON = {"seed": ("int", 0), "output": ("str", ""), "format": ("str", "")}

SCHEMAS: dict[str, dict[str, tuple[str, object]]] = {
    "sample": {
        **_COMMON,
        "alpha": ("float", _REQUIRED),
        "sigma": ("float", 1.0),
        "n": ("int", _REQUIRED),
    },
    "estimate": {
        **_COMMON,
        "alpha": ("float", _REQUIRED),
        "sigma": ("float", 1.0),
        "n": ("int", _REQUIRED),
        "k1": ("int", 0),
    },
    "stability": {
        **_COMMON,
        "source": ("str", "sas"),
        "alpha": ("float", 0.0),
        "n": ("int", _REQUIRED),
        "threshold": ("float", 0.05),
        "shift": ("float", 5.0),
    },
    "exit-time": {
        **_COMMON,
        "objective": ("str", "quadratic"),
        "dim": ("int", 1),
        "m1": ("float", -1.0),
        "m2": ("float", 2.0),
        "scale": ("float", 1.0),
        "start_basin": ("int", 0),
        "alpha": ("float", _REQUIRED),
        "eps": ("float", _REQUIRED),
        "a": ("float", _REQUIRED),
        "xi": ("float", 0.0),
        "eta": ("float", 1e-3),
        "reps": ("int", 500),
        "sigma_brownian": ("float", 0.0),
        "noise_scaling": ("str", "jump"),
        "time_cap_factor": ("float", 8.0),
        "max_diverged_fraction": ("float", 0.5),
        "records_output": ("str", ""),
    },
    "transition": {
        **_COMMON,
        "m1": ("float", -1.0),
        "m2": ("float", 2.0),
        "scale": ("float", 1.0),
        "alpha": ("float", _REQUIRED),
        "eps": ("float", _REQUIRED),
        "delta": ("float", 0.2),
        "eta": ("float", 1e-3),
        "reps": ("int", 300),
        "start_basin": ("int", 0),
        "noise_scaling": ("str", "jump"),
        "time_cap_factor": ("float", 8.0),
        "max_diverged_fraction": ("float", 0.5),
        "records_output": ("str", ""),
    },
    "metastability": {
        **_COMMON,
        "minima": ("list_float", _REQUIRED),
        "saddles": ("list_float", _REQUIRED),
        "alpha": ("float", _REQUIRED),
    },
    "converge": {
        **_COMMON,
        "noise": ("str", "sas"),
        "alpha": ("float", 1.5),
        "gamma": ("float", 0.0),
        "scale": ("float", 1.0),
        "d": ("int", 10),
        "w0_scale": ("float", 4.0),
        "ks": ("list_int", (100, 1000, 10000)),
        "reps": ("int", 100),
        "m_const": ("float", 1.0),
        "sigma_gamma": ("float", 0.0),
        "c": ("float", 0.0),
        "eta": ("float", 0.0),
        "sigma_samples": ("int", 20000),
        "max_diverged_fraction": ("float", 0.5),
    },
    "train": {
        **_COMMON,
        "source": ("str", "blobs"),
        "n": ("int", 8000),
        "dim": ("int", 20),
        "classes": ("int", 10),
        "spread": ("float", 2.0),
        "images": ("str", ""),
        "labels": ("str", ""),
        "test_images": ("str", ""),
        "test_labels": ("str", ""),
        "subsample": ("int", 0),
        "width": ("int", 128),
        "depth": ("int", 3),
        "b": ("int", 100),
        "eta": ("float", 0.1),
        "iters": ("int", 1000),
        "loss": ("str", "nll"),
        "log_every": ("int", 100),
        "measure_c_st": ("bool", False),
        "inject_alpha": ("float", 0.0),
        "inject_scale": ("float", 1.0),
        "init": ("str", "fan_in"),
    },
    "sweep": {
        **_COMMON,
        "source": ("str", "blobs"),
        "n": ("int", 2000),
        "dim": ("int", 20),
        "classes": ("int", 10),
        "spread": ("float", 2.0),
        "images": ("str", ""),
        "labels": ("str", ""),
        "test_images": ("str", ""),
        "test_labels": ("str", ""),
        "subsample": ("int", 0),
        "widths": ("list_int", _REQUIRED),
        "depths": ("list_int", (2,)),
        "batch_sizes": ("list_int", _REQUIRED),
        "etas": ("list_float", _REQUIRED),
        "loss": ("str", "nll"),
        "iters": ("int", 300),
        "groups_output": ("str", "sweep_groups.csv"),
        "max_diverged_fraction": ("float", 0.5),
    },
}

COMMANDS = tuple(SCHEMAS)

_DEFAULT_FORMAT = {cmd: "csv" for cmd in COMMANDS}
_DEFAULT_FORMAT["metastability"] = "json"


@dataclass(frozen=True)
class ExperimentConfig:
    """A resolved, validated experiment invocation."""

    command: str
    parameters: dict
    output_path: str
    format: str


def _convert(command: str, key: str, value, kind: str):
    if not isinstance(value, str):
        return value  # already typed (defaults)
    sval = value.strip()
    try:
        if kind == "int":
            return int(sval)
        if kind == "float":
            return float(sval)
        if kind == "str":
            return sval
        if kind == "bool":
            if sval.lower() in ("true", "1", "yes"):
                return True
            if sval.lower() in ("false", "0", "no"):
                return False
            raise ValueError(sval)
        if kind == "list_int":
            return tuple(int(p.strip()) for p in sval.split(",") if p.strip())
        if kind == "list_float":
            return tuple(float(p.strip()) for p in sval.split(",") if p.strip())
    except ValueError:
        raise ConfigError(
            f"{command}: key '{key}' expects {kind}, got {value!r}"
        ) from None
    raise ConfigError(f"{command}: key '{key}' has unsupported kind {kind}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(
    text: str, command_override: str | None = None, overrides: dict | None = None
) -> ExperimentConfig:
    """Typed config from `key = value` text, with flag overrides applied.

    The command comes from a `command = ...` line unless overridden.
    Unknown, duplicate, or missing required keys are fatal and named in the
    diagnostic.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key in raw:
            raise ConfigError(f"duplicate key '{key}' (line {lineno})")
        raw[key] = value
    command = command_override or raw.pop("command", None)
    if command_override is not None:
        raw.pop("command", None)
    if not command:
        raise ConfigError(f"no command given; choose one of {', '.join(COMMANDS)}")
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}; choose one of {', '.join(COMMANDS)}")
    for key, value in (overrides or {}).items():
        raw[key] = value
    schema = SCHEMAS[command]
    unknown = [k for k in raw if k not in schema]
    if unknown:
        raise ConfigError(f"{command}: unknown key '{unknown[0]}'")
    params = {}
    for key, (kind, default) in schema.items():
        if key in raw:
            params[key] = _convert(command, key, raw[key], kind)
        elif default is _REQUIRED:
            raise ConfigError(f"{command}: missing required key '{key}'")
        else:
            params[key] = default
    fmt = params.pop("format") or _DEFAULT_FORMAT[command]
    if fmt != _DEFAULT_FORMAT[command]:
        raise ConfigError(
            f"{command}: format '{fmt}' unsupported; this command emits "
            f"{_DEFAULT_FORMAT[command]}"
        )
    output = params.pop("output") or f"{command}.{fmt}"
    return ExperimentConfig(
        command=command, parameters=params, output_path=output, format=fmt
    )


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical text form; parsing it back yields an equal config."""
    lines = [f"command = {config.command}"]
    for key in sorted(config.parameters):
        lines.append(f"{key} = {_format_value(config.parameters[key])}")
    lines.append(f"output = {config.output_path}")
    lines.append(f"format = {config.format}")
    return "\n".join(lines) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode()).hexdigest()[:16]


def _provenance_lines(config: ExperimentConfig, wall_time_s: float) -> list[str]:
    lines = [
        f"# levylab {config.command}",
        f"# config_hash = {config_hash(config)}",
        f"# seed = {config.parameters.get('seed', 0)}",
    ]
    for key in sorted(config.parameters):
        if key == "seed":
            continue
        lines.append(f"# {key} = {_format_value(config.parameters[key])}")
    lines.append(f"# output = {config.output_path}")
    lines.append(f"# format = {config.format}")
    lines.append(f"# wall_time_s = {wall_time_s:.3f}")
    return lines


def _resolve_path(path: str) -> str:
    if os.path.isabs(path):
        return path
    return os.path.join(os.environ.get(OUT_DIR_ENV, "."), path)


def _write_csv(path: str, config: ExperimentConfig, wall: float,
               header: str, rows: list[str], partial: bool = False,
               trailer: list[str] | None = None) -> None:
    lines = _provenance_lines(config, wall)
    if partial:
        lines.append("# partial = true")
    lines.append(header)
    lines.extend(rows)
    lines.extend(trailer or [])
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _build_objective(p: dict):
    name = p.get("objective", "double_well")
    if name == "quadratic":
        spec = quadratic(p.get("dim", 1))
        center = tuple([0.0] * p.get("dim", 1))
        return spec, center, 1.0
    if name == "double_well":
        spec = double_well(p["m1"], p["m2"], p["scale"])
        center = (float(spec.minima[p["start_basin"]]),)
        return spec, center, None
    raise ConfigError(f"objective must be 'quadratic' or 'double_well', got {name!r}")


def _run_sample(config: ExperimentConfig):
    p = config.parameters
    params = StableParams(p["alpha"], p["sigma"])
    draws = sample_sas(params, p["n"], RngStream(p["seed"]))
    return "value", [repr(float(v)) for v in draws], False, None


def _run_estimate(config: ExperimentConfig):
    p = config.parameters
    params = StableParams(p["alpha"], p["sigma"])
    draws = sample_sas(params, p["n"], RngStream(p["seed"]))
    k1 = p["k1"] if p["k1"] > 0 else choose_block_size(p["n"])
    est = estimate_alpha(draws, k1)
    return TAIL_ESTIMATE_HEADER, [est.csv_row()], False, None


def _run_stability(config: ExperimentConfig):
    p = config.parameters
    gen = RngStream(p["seed"]).generator()
    n = p["n"]
    if p["source"] == "sas":
        if p["alpha"] <= 0.0:
            raise ConfigError("stability: key 'alpha' required for source = sas")
        pool = sample_sas(StableParams(p["alpha"]), n, RngStream(p["seed"]))
    elif p["source"] == "gaussian":
        pool = gen.normal(0.0, 1.0, n)
    elif p["source"] == "mixture":
        pool = gen.normal(0.0, 1.0, n)
        signs = gen.integers(0, 2, n) * 2 - 1
        pool = pool + p["shift"] * signs
    else:
        raise ConfigError(
            f"stability: source must be sas, gaussian, or mixture, got {p['source']!r}"
        )
    report = stability_condition(pool, RngStream(p["seed"], 1), p["threshold"])
    return STABILITY_REPORT_HEADER, [report.csv_row()], False, None


def _run_exit_time(config: ExperimentConfig):
    p = config.parameters
    spec, center, linear_rate = _build_objective(p)
    study = exit_time_study(
        spec, center, p["alpha"], p["eps"], p["a"], p["eta"],
        RngStream(p["seed"]), n_replicates=p["reps"], xi=p["xi"],
        sigma_brownian=p["sigma_brownian"],
        time_cap_factor=p["time_cap_factor"],
        noise_scaling=p["noise_scaling"], linear_rate=linear_rate,
    )
    partial = study.n_diverged / p["reps"] > p["max_diverged_fraction"]
    extra = None
    if p["records_output"]:
        extra = (p["records_output"], EXIT_RECORD_HEADER,
                 [r.csv_row() for r in study.records])
    return EXIT_STUDY_HEADER, [study.csv_row()], partial, extra


def _run_transition(config: ExperimentConfig):
    p = config.parameters
    spec = double_well(p["m1"], p["m2"], p["scale"])
    study = transition_study(
        spec, p["alpha"], p["eps"], p["delta"], p["eta"], RngStream(p["seed"]),
        n_replicates=p["reps"], start_basin=p["start_basin"],
        noise_scaling=p["noise_scaling"], time_cap_factor=p["time_cap_factor"],
    )
    partial = study.n_diverged / p["reps"] > p["max_diverged_fraction"]
    extra = None
    if p["records_output"]:
        extra = (p["records_output"], TRANSITION_RECORD_HEADER,
                 [r.csv_row() for r in study.records])
    return TRANSITION_STUDY_HEADER, [study.csv_row()], partial, extra


def _run_converge(config: ExperimentConfig):
    p = config.parameters
    kind = p["noise"]
    if kind not in ("sas", "gaussian"):
        raise ConfigError(f"converge: noise must be 'sas' or 'gaussian', got {kind!r}")
    alpha = 2.0 if kind == "gaussian" else p["alpha"]
    noise = GradientNoise(kind, alpha, p["scale"])
    gamma = p["gamma"] if p["gamma"] > 0.0 else (
        1.0 if kind == "gaussian" else default_gamma(alpha)
    )
    spec = quadratic(p["d"])
    w0 = np.full(p["d"], p["w0_scale"] / np.sqrt(p["d"]))
    rng = RngStream(p["seed"])
    sigma_gamma = p["sigma_gamma"]
    if sigma_gamma <= 0.0:
        sigma_gamma = estimate_sigma_gamma(
            spec, noise, w0, gamma, rng.substream(0), p["sigma_samples"]
        )
    gap = float(spec.f(w0))
    cfg = ConvergenceConfig(
        gamma=gamma, sigma_gamma=sigma_gamma, M=p["m_const"], gap=gap,
        ks=tuple(p["ks"]), replicates=p["reps"],
        stepsize_c=(p["c"] if p["c"] > 0.0 else None),
        eta=(p["eta"] if p["eta"] > 0.0 else None),
    )
    rows = run_convergence(spec, noise, cfg, w0, rng.substream(1))
    partial = any(r.diverged_fraction > p["max_diverged_fraction"] for r in rows)
    trailer = [f"# fitted_slope = {fitted_rate_slope(rows)!r}",
               f"# sigma_gamma = {sigma_gamma!r}"]
    return CONVERGENCE_ROW_HEADER, [r.csv_row() for r in rows], partial, None, trailer


def _load_data(p: dict, rng: RngStream) -> DatasetSplit:
    if p["source"] == "blobs":
        return synthetic_blobs(p["n"], p["dim"], p["classes"], p["spread"], rng)
    if p["source"] == "mnist":
        for key in ("images", "labels", "test_images", "test_labels"):
            if not p[key]:
                raise ConfigError(f"source = mnist requires key '{key}'")
        train_x, train_y = load_mnist_idx(p["images"], p["labels"])
        test_x, test_y = load_mnist_idx(p["test_images"], p["test_labels"])
        sub = p["subsample"]
        if sub > 0:
            train_x, train_y = train_x[:sub], train_y[:sub]
        return DatasetSplit(
            train_x=train_x, train_y=train_y, test_x=test_x, test_y=test_y,
            n_classes=10,
        )
    raise ConfigError(f"source must be 'blobs' or 'mnist', got {p['source']!r}")


def _run_train(config: ExperimentConfig):
    p = config.parameters
    if p["loss"] not in LOSS_KINDS:
        raise ConfigError(f"train: loss must be one of {LOSS_KINDS}, got {p['loss']!r}")
    rng = RngStream(p["seed"])
    data = _load_data(p, rng.substream(1))
    sizes = (data.input_dim, *([p["width"]] * (p["depth"] - 1)), data.n_classes)
    model = init_mlp(sizes, rng.substream(2), scheme=p["init"])
    injection = None
    if p["inject_alpha"] > 0.0:
        injection = InjectedNoise(p["inject_alpha"], p["inject_scale"])
    rows = train_with_tail_logging(
        model, data, p["b"], p["eta"], p["iters"], p["loss"], rng.substream(3),
        log_every=p["log_every"], measure_c_st=p["measure_c_st"],
        injection=injection,
    )
    return train_log_header(p["depth"]), [r.csv_row() for r in rows], False, None


def _run_sweep(config: ExperimentConfig):
    p = config.parameters
    if p["loss"] not in LOSS_KINDS:
        raise ConfigError(f"sweep: loss must be one of {LOSS_KINDS}, got {p['loss']!r}")
    rng = RngStream(p["seed"])
    data = _load_data(p, rng.substream(1))
    cells, groups = noise_scale_sweep(
        data, tuple(p["widths"]), tuple(p["depths"]), tuple(p["batch_sizes"]),
        tuple(p["etas"]), p["loss"], p["iters"], rng.substream(2),
    )
    n_div = sum(c.diverged for c in cells)
    partial = n_div / len(cells) > p["max_diverged_fraction"]
    extra = (p["groups_output"], SWEEP_GROUP_HEADER, [g.csv_row() for g in groups])
    return SWEEP_CELL_HEADER, [c.csv_row() for c in cells], partial, extra


def _run_metastability_json(config: ExperimentConfig, wall: float, partial: bool) -> str:
    p = config.parameters
    model = solved_model(tuple(p["minima"]), tuple(p["saddles"]), p["alpha"])
    payload = {
        "provenance": {
            "command": config.command,
            "config_hash": config_hash(config),
            "seed": p.get("seed", 0),
            "parameters": {k: v for k, v in sorted(p.items())},
            "wall_time_s": round(wall, 3),
        },
        "result": model.as_dict(),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


_RUNNERS = {
    "sample": _run_sample,
    "estimate": _run_estimate,
    "stability": _run_stability,
    "exit-time": _run_exit_time,
    "transition": _run_transition,
    "converge": _run_converge,
    "train": _run_train,
    "sweep": _run_sweep,
}

USAGE = (
    "usage: levylab <command> [--config FILE] [--key value ...]\n"
    f"commands: {', '.join(COMMANDS)}\n"
    "Config files hold `key = value` lines (# comments, comma lists);\n"
    "flags override file values. Results carry a provenance header.\n"
)


def _parse_argv(argv: list[str]) -> tuple[str, str, dict[str, str]]:
    command = argv[0]
    file_text = ""
    flags: dict[str, str] = {}
    i = 1
    while i < len(argv):
        tok = argv[i]
        if not tok.startswith("--"):
            raise ConfigError(f"expected --key, got {tok!r}")
        body = tok[2:]
        if "=" in body:
            key, _, value = body.partition("=")
        else:
            key = body
            i += 1
            if i >= len(argv):
                raise ConfigError(f"flag --{key} needs a value")
            value = argv[i]
        if key == "config":
            try:
                with open(value) as fh:
                    file_text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config file {value!r}: {exc}") from None
        else:
            if key in flags:
                raise ConfigError(f"duplicate key '{key}'")
            flags[key] = value
        i += 1
    return command, file_text, flags


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        sys.stdout.write(USAGE)
        return 0 if argv else 2
    try:
        command, file_text, flags = _parse_argv(argv)
        config = parse_config(file_text, command_override=command, overrides=flags)
        start = time.monotonic()
        out_path = _resolve_path(config.output_path)
        if config.command == "metastability":
            wall = time.monotonic() - start
            text = _run_metastability_json(config, wall, partial=False)
            with open(out_path, "w") as fh:
                fh.write(text)
            return 0
        result = _RUNNERS[config.command](config)
        header, rows, partial, extra = result[0], result[1], result[2], result[3]
        trailer = result[4] if len(result) > 4 else None
        wall = time.monotonic() - start
        _write_csv(out_path, config, wall, header, rows, partial, trailer)
        if extra is not None:
            ex_path, ex_header, ex_rows = extra
            _write_csv(_resolve_path(ex_path), config, wall, ex_header, ex_rows, partial)
        return 3 if partial else 0
    except (ConfigError, ParameterError, ShapeError, DegenerateInputError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc), "status": 2}
        sys.stderr.write(json.dumps(record) + "\n")
        return 2
