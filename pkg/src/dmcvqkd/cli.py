"""Command-line front end: JSON configs in, CSV/JSON sweep artifacts out.

Exit codes are a stable contract: 0 success, 2 config/validation failure,
3 numerical/runtime failure (messages name the module error class). Every
CSV starts with a metadata comment line (tool version, config hash, seed),
and files are written atomically (temp file then rename). Outputs carry no
timestamps, so a fixed config and seed reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile

from . import __version__
from .bipartite import ChannelModel, covariance_sweep
from .bipartite import sweep_csv_rows as covariance_csv_rows
from .constellation import from_json_dict, mb_shaped, qam_grid, shaped_qam
from .convergence import convergence_sweep, sweep_csv_rows
from .errors import DMCVQKDError
from .protocol import ProtocolRun, run_protocol
from .security import compose_budget

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    """Config failed schema validation."""


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def _check_keys(doc: dict, required: set[str], optional: set[str], where: str) -> None:
    unknown = set(doc) - required - optional
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"missing {where} keys: {sorted(missing)}")


def _number(doc: dict, key: str, minimum=None, maximum=None, strict_min=False) -> float:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key} must be a finite number, got {v!r}")
    v = float(v)
    if minimum is not None and (v <= minimum if strict_min else v < minimum):
        raise ConfigError(f"{key} = {v} below the allowed minimum {minimum}")
    if maximum is not None and v > maximum:
        raise ConfigError(f"{key} = {v} above the allowed maximum {maximum}")
    return v


def _integer(doc: dict, key: str, minimum: int = 1) -> int:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    if v < minimum:
        raise ConfigError(f"{key} = {v} below the allowed minimum {minimum}")
    return v


def _orders(doc: dict) -> list[int]:
    orders = doc["orders"]
    if not isinstance(orders, list) or not orders:
        raise ConfigError("orders must be a non-empty list of integers")
    out = []
    for m in orders:
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise ConfigError(f"orders entries must be positive integers, got {m!r}")
        out.append(m)
    return out


def _config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _meta_line(doc: dict, seed) -> str:
    return f"# dmcvqkd={__version__} config_sha256={_config_hash(doc)} seed={seed}"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, meta: str, header: list[str], rows: list[list]) -> None:
    lines = [meta, ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _write_atomic(path, "\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _write_json(path: str, payload: dict) -> None:
    _write_atomic(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def cmd_converge(config: dict, out_dir: str, seed) -> int:
    _check_keys(config, {"orders", "mbar"}, {"dim", "k_branches", "coverage"}, "converge")
    orders = _orders(config)
    mbar = _number(config, "mbar", minimum=0.0)
    dim = _integer(config, "dim") if "dim" in config else None
    k_branches = _integer(config, "k_branches") if "k_branches" in config else 6
    coverage = _number(config, "coverage", minimum=1.0, strict_min=True) if "coverage" in config else 2.5
    reports = convergence_sweep(orders, mbar, dim, k_branches, coverage)
    header, rows = sweep_csv_rows(reports)
    meta = _meta_line(config, seed)
    _write_csv(os.path.join(out_dir, "converge.csv"), meta, header, rows)
    payload = {
        "meta": {"tool": f"dmcvqkd={__version__}", "config_sha256": _config_hash(config), "seed": seed},
        "rows": [dict(zip(header, map(_jsonable, row))) for row in rows],
    }
    _write_json(os.path.join(out_dir, "converge.json"), payload)
    return EXIT_OK


def cmd_covariance(config: dict, out_dir: str, seed) -> int:
    _check_keys(
        config, {"orders", "mbar", "tau", "xi"}, {"w", "dim", "coverage"}, "covariance"
    )
    orders = _orders(config)
    mbar = _number(config, "mbar", minimum=0.0)
    tau = _number(config, "tau", minimum=0.0, maximum=1.0, strict_min=True)
    xi = _number(config, "xi", minimum=0.0)
    w = _number(config, "w", minimum=0.0) if "w" in config else 0.0
    dim = _integer(config, "dim") if "dim" in config else None
    coverage = _number(config, "coverage", minimum=1.0, strict_min=True) if "coverage" in config else 2.5
    points = covariance_sweep(orders, mbar, ChannelModel(tau, xi), w, dim, coverage)
    header, rows = covariance_csv_rows(points)
    meta = _meta_line(config, seed)
    _write_csv(os.path.join(out_dir, "covariance.csv"), meta, header, rows)
    payload = {
        "meta": {"tool": f"dmcvqkd={__version__}", "config_sha256": _config_hash(config), "seed": seed},
        "rows": [dict(zip(header, map(_jsonable, row))) for row in rows],
    }
    _write_json(os.path.join(out_dir, "covariance.json"), payload)
    return EXIT_OK


def cmd_security(config: dict, out_dir: str, seed) -> int:
    _check_keys(config, {"mbar", "dim", "eps_tilde"}, set(), "security")
    mbar = _number(config, "mbar", minimum=0.0)
    dim = _integer(config, "dim")
    eps_tilde = _number(config, "eps_tilde", minimum=0.0)
    budget = compose_budget(eps_tilde, mbar, dim)
    print(json.dumps(budget.to_json_dict(), sort_keys=True, indent=2))
    return EXIT_OK


def _build_constellation(doc) -> tuple:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError("constellation must be an object with a 'type'")
    kind = doc["type"]
    if kind == "qam":
        _check_keys(
            doc, {"type", "m"}, {"spacing", "nu", "target_mbar", "coverage"}, "constellation"
        )
        m = _integer(doc, "m")
        if "target_mbar" in doc:
            if "spacing" in doc or "nu" in doc:
                raise ConfigError("give either target_mbar or spacing+nu, not both")
            coverage = (
                _number(doc, "coverage", minimum=1.0, strict_min=True)
                if "coverage" in doc
                else 2.5
            )
            c, _ = shaped_qam(m, _number(doc, "target_mbar", minimum=0.0), coverage)
            return c, f"qam{m}-mbar{doc['target_mbar']}"
        if "spacing" not in doc:
            raise ConfigError("qam constellation needs spacing (or target_mbar)")
        spacing = _number(doc, "spacing", minimum=0.0, strict_min=True)
        nu = _number(doc, "nu") if "nu" in doc else 0.0
        return mb_shaped(qam_grid(m, spacing), nu), f"qam{m}-s{spacing}-nu{nu}"
    if kind == "file":
        _check_keys(doc, {"type", "path"}, set(), "constellation")
        try:
            with open(doc["path"], encoding="utf-8") as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read constellation file: {exc}") from exc
        return from_json_dict(payload), str(doc["path"])
    raise ConfigError(f"unknown constellation type {kind!r}")


def cmd_simulate(config: dict, out_dir: str, seed) -> int:
    _check_keys(
        config,
        {"constellation", "tau", "xi", "rounds", "test_fraction"},
        {"seed", "per_round_csv", "tau_min", "xi_max"},
        "simulate",
    )
    if seed is None:
        raise ConfigError("simulate needs a seed (config key 'seed' or --seed)")
    c, label = _build_constellation(config["constellation"])
    run = ProtocolRun(
        constellation=c,
        channel=ChannelModel(
            _number(config, "tau", minimum=0.0, maximum=1.0, strict_min=True),
            _number(config, "xi", minimum=0.0),
        ),
        rounds=_integer(config, "rounds", minimum=100),
        test_fraction=_number(config, "test_fraction", minimum=0.0, maximum=1.0, strict_min=True),
        seed=seed,
        constellation_id=label,
        tau_min=_number(config, "tau_min") if "tau_min" in config else None,
        xi_max=_number(config, "xi_max") if "xi_max" in config else None,
    )
    want_csv = bool(config.get("per_round_csv", False))
    if want_csv:
        result, records = run_protocol(run, with_rounds=True)
        header = ["x_re", "x_im", "y_re", "y_im", "test_flag", "decision_map", "decision_md"]
        rows = [
            [float(records.x[i].real), float(records.x[i].imag),
             float(records.y[i].real), float(records.y[i].imag),
             int(records.test_flag[i]), int(records.decision_map[i]),
             int(records.decision_md[i])]
            for i in range(run.rounds)
        ]
        _write_csv(os.path.join(out_dir, "simulate_rounds.csv"), _meta_line(config, seed), header, rows)
    else:
        result = run_protocol(run)
    payload = {
        "meta": {
            "tool": f"dmcvqkd={__version__}",
            "config_sha256": _config_hash(config),
            "seed": seed,
            "constellation": label,
            "noise_model": "gaussian-thermal-loss-husimi",
        },
        "result": result.to_json_dict(),
    }
    _write_json(os.path.join(out_dir, "simulate_result.json"), payload)
    return EXIT_OK


_COMMANDS = {
    "converge": cmd_converge,
    "covariance": cmd_covariance,
    "security": cmd_security,
    "simulate": cmd_simulate,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmcvqkd",
        description="Convergence, covariance and security numerics for DM-CVQKD",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        seed = args.seed if args.seed is not None else config.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](config, args.out, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DMCVQKDError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
