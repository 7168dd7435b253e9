"""On-disk formats: instance bundles / per-instance files with a manifest,
and JSON-lines result stores for resumable benchmark runs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence, Union

from .sim import SCHEMA_VERSION, Instance, instance_from_dict, instance_to_dict

PathLike = Union[str, Path]


class SchemaVersionError(ValueError):
    pass


def _check_version(doc: dict, path: Path) -> None:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{path}: schema_version {version!r} not supported (expected {SCHEMA_VERSION})"
        )


def save_instances(instances: Sequence[Instance], path: PathLike) -> None:
    """Write a single JSON bundle holding every instance."""
    path = Path(path)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "instances": [instance_to_dict(inst) for inst in instances],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_instances(path: PathLike) -> list[Instance]:
    """Read instances from a bundle file or from a generated directory
    (manifest plus one file per instance)."""
    path = Path(path)
    if path.is_dir():
        return _load_instance_dir(path)
    doc = json.loads(path.read_text())
    _check_version(doc, path)
    return [instance_from_dict(d) for d in doc["instances"]]


def write_instance_dir(instances: Sequence[Instance], out_dir: PathLike,
                       config: dict | None = None) -> Path:
    """One JSON file per instance plus a manifest describing the set."""
    out_dir = Path(out_dir)
    inst_dir = out_dir / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for inst in instances:
        name = f"{inst.id}.json"
        doc = {"schema_version": SCHEMA_VERSION, "instance": instance_to_dict(inst)}
        (inst_dir / name).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        names.append(name)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "count": len(instances),
        "files": names,
        "config": config or {},
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest_path


def _load_instance_dir(out_dir: Path) -> list[Instance]:
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"{out_dir} has no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    _check_version(manifest, manifest_path)
    instances = []
    for name in manifest["files"]:
        doc = json.loads((out_dir / "instances" / name).read_text())
        _check_version(doc, out_dir / "instances" / name)
        instances.append(instance_from_dict(doc["instance"]))
    return instances


def append_jsonl(path: PathLike, records: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: PathLike) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with path.open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
