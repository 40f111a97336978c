"""Command-line entry point: ``atomrb {rb,ndro,calibrate,verify-tables}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from atomrb.config import ConfigError, ExperimentConfig

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="atomrb", description="Atom-array randomized benchmarking simulator.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (
        ("rb", "simulate and fit randomized benchmarking"),
        ("ndro", "characterize non-destructive readout"),
        ("calibrate", "simulate Rabi and Ramsey calibrations"),
        ("verify-tables", "audit the Clifford gate tables"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, help="experiment config JSON")
        p.add_argument("--seed", type=int, help="master seed, overrides the config")
        p.add_argument("--out", type=Path, help="output directory, overrides the config")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
    return ap


def load_config(path: Path | None, seed: int | None) -> ExperimentConfig:
    """Read the config, apply a seed override, and validate."""
    if path is None:
        if seed is None:
            raise ConfigError("either --config or --seed is required")
        return ExperimentConfig(seed=seed).validate()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if seed is not None:
        data["seed"] = seed
    return ExperimentConfig.from_dict(data).validate()


def _verify(out: Path | None) -> int:
    from atomrb.experiments import verify_tables

    report = verify_tables()
    text = report.to_json()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify_tables.json").write_text(text)
        files = {"verify_tables.json": hashlib.sha256(text.encode()).hexdigest()}
        (out / "manifest.json").write_text(json.dumps({"kind": "verify-tables", "files": files}, indent=1))
    status = "PASS" if report.passed else "FAIL"
    print(f"verify-tables: {status} ({report.n_checks} checks, mean area {report.average_area_bb1 / 3.141592653589793:.4f} pi with BB1)")
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "verify-tables":
        return _verify(args.out)

    from atomrb import experiments

    try:
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    run = {
        "rb": experiments.run_rb,
        "ndro": experiments.run_ndro_characterization,
        "calibrate": experiments.run_calibration,
    }[args.command]
    try:
        manifest = run(cfg, args.out, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - any failure maps to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(json.dumps(manifest.summary, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
