"""Command-line entry point: dataset generation, training, evaluation,
sweeps and gradient diagnostics, driven by an INI config file.

Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import datagen
from .datagen import DatasetSplit, FlowSamples, build_collocation, load_csv, write_csv
from .errors import ConfigurationError, FlowpinnError
from .evaluate import evaluate, gradient_histograms, write_histograms
from .ioutils import atomic_write_text
from .network import Mlp, MlpConfig, load_checkpoint, save_checkpoint
from .optim import TrainingBudget
from .physics import NS2D, input_width, output_width
from .seeding import subseed
from .trainers import RunConfig, component_gradients, train
from .weighting import RELAXATION_CONSTANTS, WeightState

KNOWN_KEYS = {
    "run": {"regime", "physics", "seed", "out_dir", "data_pressure", "report_every"},
    "network": {"hidden_layers", "neurons", "activation", "init"},
    "budget": {"iterations", "learning_rates", "batch_size"},
    "weighting": {"strategy", "w_pde", "lambda_d", "alpha", "update_every"},
    "data": {
        "source", "re", "n_points", "grid", "domain", "z_levels", "t0", "t1",
        "dt_train", "dt_test", "collocation_random", "train_csv", "test_csv",
        "with_test",
    },
    "segments": {"n_segments"},
    "sweep": {"axis", "layers", "neurons", "constants"},
}

GENERATORS = ("taylor_green", "beltrami")


@dataclass
class ExperimentConfig:
    """Validated view of one INI config file."""

    raw: dict[str, dict[str, str]]
    base_dir: str

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        if not os.path.exists(path):
            raise ConfigurationError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse config {path}: {exc}") from None
        raw = {section: dict(parser.items(section)) for section in parser.sections()}
        cfg = cls(raw=raw, base_dir=os.path.dirname(os.path.abspath(path)))
        cfg.validate_keys()
        return cfg

    def validate_keys(self) -> None:
        for section, items in self.raw.items():
            if section not in KNOWN_KEYS:
                raise ConfigurationError(f"unknown config section [{section}]")
            for key in items:
                if key not in KNOWN_KEYS[section]:
                    raise ConfigurationError(f"unknown config key {section}.{key}")

    def get(self, section: str, key: str, default=None) -> str | None:
        return self.raw.get(section, {}).get(key, default)

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ConfigurationError(f"missing required config key {section}.{key}")
        return value

    def get_typed(self, section: str, key: str, convert, default=None):
        value = self.get(section, key)
        if value is None:
            return default
        try:
            return convert(value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad value for {section}.{key}: {exc}") from None

    def resolve_path(self, value: str) -> str:
        return value if os.path.isabs(value) else os.path.join(self.base_dir, value)


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _parse_floats(value: str) -> tuple[float, ...]:
    return tuple(float(part) for part in value.split(",") if part.strip())


def _parse_ints(value: str) -> tuple[int, ...]:
    return tuple(int(part) for part in value.split(",") if part.strip())


# config -> objects --------------------------------------------------------


def master_seed(cfg: ExperimentConfig, override: int | None) -> int:
    if override is not None:
        return int(override)
    return cfg.get_typed("run", "seed", int, 0)


def build_mlp_config(cfg: ExperimentConfig, seed: int) -> MlpConfig:
    physics = cfg.require("run", "physics")
    return MlpConfig(
        n_inputs=input_width(physics),
        hidden_layers=cfg.get_typed("network", "hidden_layers", int, 4),
        neurons=cfg.get_typed("network", "neurons", int, 50),
        n_outputs=output_width(physics),
        activation=cfg.get("network", "activation", "tanh"),
        init_scheme=cfg.get("network", "init", "xavier"),
        seed=subseed(seed, "init"),
    )


def build_budget(cfg: ExperimentConfig, seed: int) -> TrainingBudget:
    return TrainingBudget(
        total_iterations=cfg.get_typed("budget", "iterations", int, 25000),
        learning_rates=cfg.get_typed("budget", "learning_rates", _parse_floats, (1e-3, 1e-4)),
        batch_size=cfg.get_typed("budget", "batch_size", int, 1000),
        seed=subseed(seed, "batch"),
    )


def build_weighting(cfg: ExperimentConfig) -> tuple[WeightState, str]:
    state = WeightState(
        lambda_d=cfg.get_typed("weighting", "lambda_d", float, 1.0),
        alpha=cfg.get_typed("weighting", "alpha", float, 0.9),
        w_pde=cfg.get_typed("weighting", "w_pde", float, 1.0),
        update_every=cfg.get_typed("weighting", "update_every", int, 10),
    )
    return state, cfg.get("weighting", "strategy", "fixed")


def build_run_config(cfg: ExperimentConfig, seed: int) -> RunConfig:
    physics = cfg.require("run", "physics")
    weighting, strategy = build_weighting(cfg)
    regime = cfg.require("run", "regime")
    default_segments = 7 if regime == "bc_pinn" else 1
    config = RunConfig(
        regime=regime,
        physics_regime=physics,
        mlp=build_mlp_config(cfg, seed),
        budget=build_budget(cfg, seed),
        weighting=weighting,
        strategy=strategy,
        n_segments=cfg.get_typed("segments", "n_segments", int, default_segments),
        re=cfg.get_typed("data", "re", float, None),
        seed=seed,
        data_pressure=cfg.get_typed("run", "data_pressure", _parse_bool, True),
        report_every=cfg.get_typed("run", "report_every", int, 100),
    )
    config.validate()
    return config


def _empty_samples(n_dim: int) -> FlowSamples:
    zero = np.zeros(0)
    return FlowSamples(
        points=np.zeros((0, n_dim + 1)), u=zero, v=zero,
        w=zero if n_dim == 3 else None, p=zero,
    )


def build_dataset(cfg: ExperimentConfig, seed: int) -> DatasetSplit:
    source = cfg.require("data", "source")
    with_test = cfg.get_typed("data", "with_test", _parse_bool, True)
    common = dict(
        t0=cfg.get_typed("data", "t0", float, 0.0),
        t1=cfg.get_typed("data", "t1", float, 7.0),
        dt_train=cfg.get_typed("data", "dt_train", float, 0.1),
        dt_test=cfg.get_typed("data", "dt_test", float, 0.01),
        seed=seed,
        with_test=with_test,
        n_collocation_random=cfg.get_typed("data", "collocation_random", int, None),
    )
    if source == "taylor_green":
        return datagen.build_taylor_green_split(
            re=cfg.get_typed("data", "re", float, 100.0),
            n_sparse=cfg.get_typed("data", "n_points", int, 96),
            grid_n=cfg.get_typed("data", "grid", int, 100),
            domain=cfg.get_typed("data", "domain", _parse_floats, (0.0, datagen.TWO_PI)),
            **common,
        )
    if source == "beltrami":
        return datagen.build_beltrami_split(
            re=cfg.get_typed("data", "re", float, 10.0),
            n_sparse=cfg.get_typed("data", "n_points", int, 96),
            grid_n=cfg.get_typed("data", "grid", int, 24),
            domain=cfg.get_typed("data", "domain", _parse_floats, (-1.0, 1.0)),
            z_levels=cfg.get_typed("data", "z_levels", _parse_floats, (-0.5, 0.0, 0.5)),
            **common,
        )
    if source == "csv":
        physics = cfg.require("run", "physics")
        schema = "flow2d" if physics == NS2D else "flow3d"
        train_path = cfg.resolve_path(cfg.require("data", "train_csv"))
        if not os.path.exists(train_path):
            raise ConfigurationError(f"data.train_csv does not exist: {train_path}")
        train = load_csv(train_path, schema)
        test_value = cfg.get("data", "test_csv")
        if test_value is not None:
            test_path = cfg.resolve_path(test_value)
            if not os.path.exists(test_path):
                raise ConfigurationError(f"data.test_csv does not exist: {test_path}")
            test = load_csv(test_path, schema)
        else:
            test = _empty_samples(train.n_dim)
        if len(train) == 0:
            raise ConfigurationError(f"training CSV has no samples: {train_path}")
        times = train.times
        t0 = cfg.get_typed("data", "t0", float, float(times.min()))
        t1 = cfg.get_typed("data", "t1", float, float(times.max()))
        bounds = [
            (float(train.points[:, i].min()), float(train.points[:, i].max()))
            for i in range(train.n_dim)
        ]
        collocation = build_collocation(
            train.points, bounds, t0, t1, subseed(seed, "collocation"),
            n_random=cfg.get_typed("data", "collocation_random", int, None),
        )
        meta = {
            "generator": "csv",
            "train_csv": train_path,
            "t0": t0,
            "t1": t1,
            "seed": seed,
            "n_train": len(train),
            "n_test": len(test),
            "n_collocation": len(collocation),
        }
        re_value = cfg.get_typed("data", "re", float, None)
        if re_value is not None:
            meta["re"] = re_value
        return DatasetSplit(train=train, test=test, collocation=collocation, meta=meta)
    raise ConfigurationError(f"unknown data source {source!r}")


# frozen-prediction store persistence ---------------------------------------


def store_to_csv(path: str, store: FlowSamples) -> None:
    spatial = ("x", "y", "z")[: store.n_dim]
    fields = ("u", "v", "w")[: store.n_dim]
    header = ",".join(spatial + ("t",) + fields)
    lines = [header]
    values = [store.points[:, i] for i in range(store.points.shape[1])]
    values += [store.component(f) for f in fields]
    for row in zip(*values):
        lines.append(",".join(repr(float(v)) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def store_from_csv(path: str) -> FlowSamples:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n_cols = data.shape[1] if data.size else 0
    if n_cols == 5:  # x,y,t,u,v
        return FlowSamples(points=data[:, :3], u=data[:, 3], v=data[:, 4])
    if n_cols == 7:  # x,y,z,t,u,v,w
        return FlowSamples(points=data[:, :4], u=data[:, 4], v=data[:, 5], w=data[:, 6])
    raise ConfigurationError(f"unrecognized prediction-store file: {path}")


# commands -------------------------------------------------------------------


def _out_dir(cfg: ExperimentConfig, args) -> str:
    out = args.out or cfg.get("run", "out_dir", "runs")
    os.makedirs(out, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = master_seed(cfg, args.seed)
    source = cfg.require("data", "source")
    if source not in GENERATORS:
        raise ConfigurationError(f"generate needs an analytic source, got {source!r}")
    split = build_dataset(cfg, seed)
    max_residual = datagen.validate_split(split)
    out = _out_dir(cfg, args)
    schema = "flow2d" if split.train.n_dim == 2 else "flow3d"
    write_csv(os.path.join(out, "train.csv"), split.train, schema)
    if len(split.test):
        write_csv(os.path.join(out, "test.csv"), split.test, schema)
    meta = dict(split.meta)
    meta["max_residual"] = max_residual
    datagen.write_sidecar(os.path.join(out, "meta.txt"), meta)
    print(f"wrote {len(split.train)} training samples to {out} "
          f"(max residual {max_residual:.3e})")
    return 0


def cmd_train(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = master_seed(cfg, args.seed)
    config = build_run_config(cfg, seed)
    split = build_dataset(cfg, seed)
    params, report = train(config, split)
    out = _out_dir(cfg, args)
    checkpoint = os.path.join(out, "checkpoint.bin")
    save_checkpoint(checkpoint, config.mlp, params)
    atomic_write_text(os.path.join(out, "report.txt"), report.to_text(config.report_every))
    if report.prev_store is not None and len(report.prev_store):
        store_to_csv(os.path.join(out, "prevstore.csv"), report.prev_store)
    final = report.final_breakdown or {}
    print(f"trained {config.regime} for {config.budget.total_iterations} iterations; "
          f"final total loss {final.get('total', float('nan')):.6e}")
    print(f"checkpoint: {checkpoint}")
    return 0


def cmd_eval(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = master_seed(cfg, args.seed)
    if not os.path.exists(args.checkpoint):
        raise FileNotFoundError(f"checkpoint not found: {args.checkpoint}")
    mlp_config, params = load_checkpoint(args.checkpoint)
    split = build_dataset(cfg, seed)
    physics = cfg.require("run", "physics")
    report = evaluate(params, Mlp(mlp_config), split, physics)
    out = _out_dir(cfg, args)
    report.write(
        os.path.join(out, "eval_steps.csv"), os.path.join(out, "eval_summary.csv")
    )
    summary = ", ".join(f"{k}={v:.4e}" for k, v in report.aggregates.items())
    print(f"aRelative L2: {summary}")
    return 0


def _sweep_case(payload) -> tuple[int, dict[str, float]]:
    raw, base_dir, seed, case = payload
    cfg = ExperimentConfig(raw=raw, base_dir=base_dir)
    config = build_run_config(cfg, seed)
    split = build_dataset(cfg, seed)
    if case["kind"] == "weighting":
        config = replace(
            config,
            strategy="relaxed",
            weighting=replace(config.weighting, w_pde=case["constant"], lambda_d=1.0),
        )
    else:
        config = replace(
            config,
            mlp=replace(config.mlp, hidden_layers=case["layers"], neurons=case["neurons"]),
        )
    params, _ = train(config, split)
    ev = evaluate(params, Mlp(config.mlp), split, config.physics_regime)
    return case["index"], ev.aggregates


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = master_seed(cfg, args.seed)
    build_run_config(cfg, seed)  # validate early
    axis = cfg.get("sweep", "axis")
    if axis not in ("weighting", "grid"):
        raise ConfigurationError(
            "sweep.axis must be 'weighting' or 'grid'"
            + ("" if axis else " (missing)")
        )
    if axis == "weighting":
        constants = cfg.get_typed("sweep", "constants", _parse_floats, RELAXATION_CONSTANTS)
        if not constants:
            raise ConfigurationError("sweep.constants is empty")
        cases = [
            {"kind": "weighting", "constant": c, "index": i}
            for i, c in enumerate(constants)
        ]
        label_header, labels = "constant", [repr(c["constant"]) for c in cases]
    else:
        layers = sorted(cfg.get_typed("sweep", "layers", _parse_ints, (5, 7, 8, 10)))
        neurons = sorted(cfg.get_typed("sweep", "neurons", _parse_ints, (50, 75, 100)))
        if not layers or not neurons:
            raise ConfigurationError("sweep.layers / sweep.neurons must be nonempty")
        cases = [
            {"kind": "grid", "layers": l, "neurons": n, "index": i}
            for i, (l, n) in enumerate((l, n) for l in layers for n in neurons)
        ]
        label_header = "layers,neurons"
        labels = [f"{c['layers']},{c['neurons']}" for c in cases]

    payloads = [(cfg.raw, cfg.base_dir, seed, case) for case in cases]
    results: dict[int, dict[str, float]] = {}
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            for index, aggregates in pool.map(_sweep_case, payloads):
                results[index] = aggregates
    else:
        for payload in payloads:
            index, aggregates = _sweep_case(payload)
            results[index] = aggregates

    field_names = sorted(results[0]) if results else []
    lines = [label_header + "," + ",".join(field_names)]
    for i, label in enumerate(labels):
        row = results[i]
        lines.append(label + "," + ",".join(repr(row[f]) for f in field_names))
    out = _out_dir(cfg, args)
    table = os.path.join(out, f"sweep_{axis}.csv")
    atomic_write_text(table, "\n".join(lines) + "\n")
    print(f"wrote {len(labels)}-row {axis} sweep table to {table}")
    return 0


def cmd_diagnose(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = master_seed(cfg, args.seed)
    if not os.path.exists(args.checkpoint):
        raise FileNotFoundError(f"checkpoint not found: {args.checkpoint}")
    mlp_config, params = load_checkpoint(args.checkpoint)
    config = build_run_config(cfg, seed)
    if mlp_config != config.mlp:
        config = replace(config, mlp=mlp_config)
        config.validate()
    split = build_dataset(cfg, seed)
    prev_store = None
    store_path = args.prevstore
    if store_path is None:
        sibling = os.path.join(os.path.dirname(os.path.abspath(args.checkpoint)), "prevstore.csv")
        if config.regime == "bc_pinn" and os.path.exists(sibling):
            store_path = sibling
    if store_path is not None:
        prev_store = store_from_csv(store_path)
    grads = component_gradients(config, split, params, prev_store=prev_store)
    histograms = gradient_histograms(grads)
    out = _out_dir(cfg, args)
    path = os.path.join(out, "gradient_histograms.csv")
    write_histograms(path, histograms)
    stats = ", ".join(f"{h.component}: max|g|={h.max_abs:.3e}" for h in histograms)
    print(f"wrote histograms for {len(histograms)} components to {path} ({stats})")
    return 0


# entry point ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise ConfigurationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flowpinn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, checkpoint=False):
        p.add_argument("--config", required=True, help="INI experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default=None, help="output directory")
        if checkpoint:
            p.add_argument("--checkpoint", required=True, help="checkpoint file")

    common(sub.add_parser("generate", help="write dataset CSVs and sidecar"))
    common(sub.add_parser("train", help="train the configured regime"))
    common(sub.add_parser("eval", help="evaluate a checkpoint on the test split"), checkpoint=True)
    sweep = sub.add_parser("sweep", help="run a weighting or architecture sweep")
    common(sweep)
    sweep.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    diagnose = sub.add_parser("diagnose", help="per-component gradient histograms")
    common(diagnose, checkpoint=True)
    diagnose.add_argument("--prevstore", default=None, help="frozen-prediction store CSV")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "generate": cmd_generate,
            "train": cmd_train,
            "eval": cmd_eval,
            "sweep": cmd_sweep,
            "diagnose": cmd_diagnose,
        }[args.command]
        return handler(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FlowpinnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 2


if __name__ == "__main__":
    sys.exit(main())
