"""
Result records and the per-run output directory.

    <out>/config.yaml          resolved configuration, first line "# config_hash: <hex>"
    <out>/summary.json|csv     scenario summary
    <out>/<table>.json|csv     per-point tables
    <out>/logs/run.log         rotating log (not part of the determinism contract)

Every file carries the config hash. Nothing time-dependent is written, so the same config and
seed reproduce the files byte for byte.
"""

from typing import List, Dict, Any, Optional
import csv
import json
import logging
import os

from pydantic import BaseModel

from bell_link.errors import ConfigMismatchError

logger = logging.getLogger(__name__)

CONFIG_SNAPSHOT = "config.yaml"
HASH_PREFIX = "# config_hash: "


class RunSummary(BaseModel):
    scenario: str
    config_hash: str
    seed: int
    results: Dict[str, Any]


class CountRecord(BaseModel):
    """Coincidence counts of one acquisition, raw and accidental-subtracted."""

    label: str
    phi_a: float
    phi_b: float
    integration_time: float
    n11: float
    n12: float
    n21: float
    n22: float
    net11: float
    net12: float
    net21: float
    net22: float
    accidental_rate: float


class DelayPointRecord(BaseModel):
    index: int
    delay: float
    relative_phase: float
    visibility_model: float
    lock_residual_rms: float
    counts: float
    net_counts: float
    accidental_rate: float


class SweepPointRecord(BaseModel):
    bob_setting: int
    phi_a: float
    phi_b: float
    n11: float
    n12: float
    n21: float
    n22: float
    p11: Optional[float]
    p12: Optional[float]
    p21: Optional[float]
    p22: Optional[float]


class FitRecord(BaseModel):
    bob_setting: int
    detector_pair: str
    net: bool
    visibility: float
    visibility_error: Optional[float]
    offset: float
    phase0: float
    residual: float
    degenerate_phase: bool
    constrained: bool


class LockRecord(BaseModel):
    time: float
    drift: float
    actuator: float
    residual: float
    intensity: float
    set_point: float
    saturated: bool


class AttackRecord(BaseModel):
    kind: str
    strategy: str
    source: str
    e_ab: Optional[float]
    e_a_prime_b: Optional[float]
    e_ab_prime: Optional[float]
    e_a_prime_b_prime: Optional[float]
    s_value: Optional[float]
    kept_fraction_min: Optional[float]


def read_existing_hash(out_dir: str) -> Optional[str]:
    path = os.path.join(out_dir, CONFIG_SNAPSHOT)
    if not os.path.exists(path):
        return None
    with open(path, "r") as fp:
        first = fp.readline().strip()
    if first.startswith(HASH_PREFIX):
        return first[len(HASH_PREFIX):]
    return ""


def prepare_output_dir(out_dir: str, config_hash: str, force: bool = False) -> None:
    """Create `out_dir`, refusing one that holds results of another configuration."""
    existing = read_existing_hash(out_dir)
    if existing is not None and existing != config_hash:
        if not force:
            logger.error(f"{out_dir} holds results for config {existing[:12]}..., refusing")
            raise ConfigMismatchError(
                f"{out_dir} holds results of config hash {existing}, current hash is "
                f"{config_hash}; use --force to overwrite"
            )
        logger.warning(f"overwriting results of config {existing[:12]}... in {out_dir}")
    os.makedirs(out_dir, exist_ok=True)


def write_config_snapshot(out_dir: str, config_yaml: str, config_hash: str) -> str:
    path = os.path.join(out_dir, CONFIG_SNAPSHOT)
    with open(path, "w") as fp:
        fp.write(f"{HASH_PREFIX}{config_hash}\n")
        fp.write(config_yaml)
    return path


def _csv_value(value):
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value)
    return value


def write_table(
    out_dir: str, name: str, rows: List[BaseModel], fmt: str, config_hash: str
) -> str:
    """One table of records as <name>.csv (hash in a comment line) or <name>.json."""
    path = os.path.join(out_dir, f"{name}.{fmt}")
    records = [row.model_dump(mode="json") for row in rows]
    if fmt == "csv":
        fieldnames = list(records[0].keys()) if records else []
        with open(path, "w", newline="", encoding="utf-8") as fp:
            fp.write(f"{HASH_PREFIX}{config_hash}\n")
            writer = csv.DictWriter(fp, fieldnames=fieldnames)
            writer.writeheader()
            for record in records:
                writer.writerow({k: _csv_value(v) for k, v in record.items()})
    else:
        with open(path, "w", encoding="utf-8") as fp:
            json.dump({"config_hash": config_hash, "rows": records}, fp, indent=2)
            fp.write("\n")
    logger.info(f"Wrote {len(records)} rows to {path}")
    return path


def write_summary(out_dir: str, summary: RunSummary, fmt: str) -> str:
    path = os.path.join(out_dir, f"summary.{fmt}")
    if fmt == "csv":
        flat = {"scenario": summary.scenario, "seed": summary.seed}
        flat.update(_flatten(summary.model_dump(mode="json")["results"]))
        with open(path, "w", newline="", encoding="utf-8") as fp:
            fp.write(f"{HASH_PREFIX}{summary.config_hash}\n")
            writer = csv.writer(fp)
            writer.writerow(["key", "value"])
            for key, value in flat.items():
                writer.writerow([key, _csv_value(value)])
    else:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(summary.model_dump_json(indent=2))
            fp.write("\n")
    logger.info(f"Wrote summary to {path}")
    return path


def _flatten(values: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for key, value in values.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat
