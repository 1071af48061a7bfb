"""Command-line front end: ``generate``, ``detect`` and ``study``.

Configuration is a YAML file with up to three blocks::

    model:    {type: er, n: 256, density: 0.1}
    detector: {type: chisq, improved: true, k: 0.35}
    study:    {replicates: 2000, alpha: 0.05, cells: [...], grid: {...}}

plus top-level ``seed``, ``threads`` and ``out_dir``. Command-line flags
override the file. Exit codes: 0 success, 2 bad configuration or input,
3 degenerate computation.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import yaml

from . import evalharness as eh
from .chisq import ChiSquareDetector
from .exceptions import DegenerateError, FormatError, ParameterError
from .l1norm import L1NormDetector
from .netgen import Rmat, density, read_edge_list, write_edge_list
from .results import ChiSquareResult, L1Result

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

_DENSITY_ALIASES = ("density", "p0", "lambda0", "eta")
_STUDY_FIELDS = {f.name for f in dataclasses.fields(eh.StudyConfig)}
_STUDY_BLOCK_KEYS = (_STUDY_FIELDS - {"model", "n", "density", "detector", "detector_params"}) | {
    "cells", "grid"}


class ConfigError(ParameterError):
    pass


def load_config(path):
    """Read a YAML config; an absent path yields an empty config."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    for block in ("model", "detector", "study"):
        if not isinstance(cfg.get(block, {}), dict):
            raise ConfigError(f"{path}: '{block}' must be a mapping")
    return cfg


def _model_fields(block):
    block = dict(block)
    out = {}
    if "type" in block:
        out["model"] = block.pop("type")
    if "n" in block:
        out["n"] = block.pop("n")
    for alias in _DENSITY_ALIASES:
        if alias in block:
            out["density"] = block.pop(alias)
    for key in ("rmat_probs", "pareto_shape", "chunglu_c"):
        if key in block:
            out[key] = block.pop(key)
    if "c" in block:
        out["chunglu_c"] = block.pop("c")
    return out, block


def _detector_fields(block):
    block = dict(block)
    out = {}
    if "type" in block:
        out["detector"] = block.pop("type")
    out["detector_params"] = block
    return out


def _apply_override(flat, key, value):
    head, _, tail = key.partition(".")
    if head == "model" and tail:
        fields, rest = _model_fields({tail: value})
        if rest:
            raise ConfigError(f"unknown model key {key!r}")
        flat.update(fields)
    elif key == "model":
        flat["model"] = value
    elif key in _DENSITY_ALIASES:
        flat["density"] = value
    elif head == "detector" and tail:
        if tail == "type":
            flat["detector"] = value
        else:
            flat["detector_params"] = {**flat.get("detector_params", {}), tail: value}
    elif key in _STUDY_FIELDS:
        flat[key] = value
    else:
        flat["detector_params"] = {**flat.get("detector_params", {}), key: value}


def study_configs(cfg, args=None):
    """Expand a parsed config into validated :class:`StudyConfig` cells."""
    model_fields, extra = _model_fields(cfg.get("model", {}))
    for key in ("M", "a", "b", "c", "d"):
        extra.pop(key, None)
    if extra:
        raise ConfigError(f"unknown model keys: {sorted(extra)}")
    study = dict(cfg.get("study", {}))
    unknown = set(study) - _STUDY_BLOCK_KEYS
    if unknown:
        raise ConfigError(f"unknown study keys: {sorted(unknown)}")
    cells = study.pop("cells", None) or [{}]
    grid = study.pop("grid", None) or {}
    if not isinstance(cells, list) or not all(isinstance(c, dict) for c in cells):
        raise ConfigError("study.cells must be a list of mappings")
    if not isinstance(grid, dict):
        raise ConfigError("study.grid must be a mapping")
    base = {**model_fields, **_detector_fields(cfg.get("detector", {})), **study}
    if "seed" in cfg:
        base["base_seed"] = cfg["seed"]
    if "threads" in cfg:
        base["threads"] = cfg["threads"]
    if args is not None:
        for flag, field in (("seed", "base_seed"), ("threads", "threads"),
                            ("replicates", "replicates"), ("alpha", "alpha")):
            if getattr(args, flag, None) is not None:
                base[field] = getattr(args, flag)
    configs = []
    for cell in cells:
        for point in eh.expand_grid(grid) if grid else [{}]:
            flat = {**base, "detector_params": dict(base.get("detector_params", {}))}
            for key, value in {**cell, **point}.items():
                _apply_override(flat, key, value)
            try:
                configs.append(eh.StudyConfig(**flat))
            except TypeError as exc:
                raise ConfigError(str(exc)) from None
    return configs


def _out_dir(cfg, args):
    path = args.out_dir or cfg.get("out_dir") or "."
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Subcommands


def cmd_generate(args):
    cfg = load_config(args.config)
    block = dict(cfg.get("model", {}))
    sc = study_configs({"model": block, "seed": cfg.get("seed", 0)}, args)[0]
    probs = tuple(block.get(k, v) for k, v in zip("abcd", sc.rmat_probs))
    if sc.model == "rmat" and "M" in block:
        model = Rmat(block["M"], *probs)
    else:
        model = eh.background_model(sc.replace(rmat_probs=probs))
    A = model.sample(sc.n, eh.stream(sc.base_seed, 0, 0))
    path = args.output or os.path.join(_out_dir(cfg, args), "network.tsv")
    try:
        write_edge_list(A, path)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None
    print(f"n={A.n} edges={A.edge_count} density={density(A):.6g} kind={A.kind} -> {path}")
    return EXIT_OK


def cmd_detect(args):
    cfg = load_config(args.config)
    block = dict(cfg.get("detector", {}))
    kind = args.detector or block.pop("type", "chisq")
    block.pop("type", None)
    if args.alpha is not None:
        block["alpha"] = args.alpha
    try:
        A = read_edge_list(args.network)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.network}: {exc.strerror}") from None
    classes = {"chisq": (ChiSquareDetector, ChiSquareResult), "l1": (L1NormDetector, L1Result)}
    if kind not in classes:
        raise ConfigError(f"unknown detector {kind!r}")
    det_cls, result_cls = classes[kind]
    try:
        det = det_cls(**block)
    except TypeError as exc:
        raise ConfigError(f"bad detector settings: {exc}") from None
    res = det.fit().detect(A)
    print(result_cls.csv_header())
    print(res.csv_row())
    return EXIT_OK


def cmd_study(args):
    cfg = load_config(args.config)
    configs = study_configs(cfg, args)
    out = _out_dir(cfg, args)
    q_rows, p_rows, s_rows = [], [], []
    ok = degenerate = 0
    for idx, sc in enumerate(configs):
        try:
            report = eh.run_study(sc)
        except DegenerateError as exc:
            degenerate += 1
            status, report = f"degenerate: {exc}", None
        except ParameterError as exc:
            status, report = f"error: {exc}", None
        else:
            ok += 1
            status = "ok"
            s_rows.extend(eh.sample_rows(idx, report))
        if sc.has_anomaly:
            p_rows.append(eh.power_row(sc, report, status))
        else:
            q_rows.append(eh.quantile_row(sc, report, status))
        if report is None:
            summary = status
        elif sc.has_anomaly:
            summary = f"DR={report.dr:.4g} FAR={report.far:.4g}"
        else:
            summary = f"q95={report.quantiles[0.95]:.4g} degenerate={report.degenerate_count}"
        print(f"[{idx}] {sc.model} n={sc.n} density={sc.density:g} {sc.detector} "
              f"{eh.variant_label(sc)}: {summary}")
    eh.write_csv(os.path.join(out, "quantiles.csv"), eh.QUANTILE_FIELDS, q_rows)
    eh.write_csv(os.path.join(out, "power.csv"), eh.POWER_FIELDS, p_rows)
    eh.write_csv(os.path.join(out, "samples.csv"), eh.SAMPLE_FIELDS, s_rows)
    if ok:
        return EXIT_OK
    return EXIT_DEGENERATE if degenerate else EXIT_INPUT


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spectral-anomaly",
        description="Spectral anomaly detection for static networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--threads", type=int, help="worker threads (output does not depend on it)")
        p.add_argument("--out-dir", dest="out_dir", help="directory for output files")
        p.add_argument("--replicates", type=int, help="Monte Carlo replicates per study cell")
        p.add_argument("--alpha", type=float, help="significance level")

    g = sub.add_parser("generate", help="sample a network and write it as an edge list")
    common(g)
    g.add_argument("-o", "--output", help="edge-list path (default <out-dir>/network.tsv)")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("detect", help="run a detector on an edge-list file")
    common(d)
    d.add_argument("network", help="edge-list file")
    d.add_argument("--detector", choices=("chisq", "l1"), help="detector (overrides config)")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("study", help="run null or power studies and write CSV files")
    common(s)
    s.set_defaults(func=cmd_study)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateError as exc:
        print(f"degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ParameterError, FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
