"""
Result files: run manifests, canonically ordered CSV tables and summaries.
"""

import json
import logging
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata as importlib_metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from exceptions import DependencyError
from harness.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
TRACKED_PACKAGES = ('numpy', 'pandas', 'scipy', 'scikit-learn', 'torch', 'networkx', 'joblib')


@dataclass
class ResultBundle:
    """CSV tables written by one campaign plus its manifest."""

    out_dir: Path
    manifest: Path
    tables: Dict[str, Path] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    def table(self, name: str) -> pd.DataFrame:
        return read_table(self.tables[name])


def package_versions() -> Dict[str, Optional[str]]:
    versions: Dict[str, Optional[str]] = {'python': platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = importlib_metadata.version(name)
        except importlib_metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def export_json(data: Dict[str, Any], output_path: Path) -> Path:
    os.makedirs(os.path.dirname(output_path) or '.', exist_ok=True)
    with open(output_path, 'w') as f:
        json.dump(data, f, indent=2, sort_keys=True, default=str)
    return Path(output_path)


def import_json(input_path: Path) -> Dict[str, Any]:
    with open(input_path, 'r') as f:
        return json.load(f)


def write_manifest(out_dir: Path, config: ExperimentConfig, command: str) -> Path:
    """
    Manifest written before any result: config hash, seed, versions, start time.

    Returns:
        Path: Manifest location
    """
    manifest = {
        'command': command,
        'config_hash': config.config_hash(),
        'seed': config.seed,
        'config': config.to_dict(),
        'versions': package_versions(),
        'started_at': datetime.now(timezone.utc).isoformat(),
        'wall_time_seconds': None,
        'tables': {},
    }
    path = export_json(manifest, Path(out_dir) / f'{command}.{MANIFEST_NAME}')
    logger.info("manifest %s (config hash %s)", path, manifest['config_hash'][:12])
    return path


def finalize_manifest(bundle: ResultBundle, wall_time: float) -> None:
    """Record wall time, written tables and summary numbers."""
    manifest = import_json(bundle.manifest)
    manifest['wall_time_seconds'] = round(wall_time, 3)
    manifest['tables'] = {name: path.name for name, path in sorted(bundle.tables.items())}
    manifest['summary'] = bundle.summary
    export_json(manifest, bundle.manifest)


def write_table(frame: pd.DataFrame, path: Path, sort_by: Optional[Sequence[str]] = None) -> Path:
    """Write a CSV in canonical row order so parallel runs give identical bytes."""
    if sort_by:
        frame = frame.sort_values(list(sort_by), kind='mergesort').reset_index(drop=True)
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n')
    logger.info("wrote %d rows to %s", len(frame), path)
    return Path(path)


def read_table(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except FileNotFoundError as e:
        raise DependencyError(f"missing result table {path}") from e


def summarize(out_dir: Path) -> List[str]:
    """
    Human-readable summary lines for every manifest in an output directory.

    Raises:
        DependencyError: If the directory holds no manifest
    """
    out_dir = Path(out_dir)
    manifests = sorted(out_dir.glob(f'*.{MANIFEST_NAME}'))
    if not manifests:
        raise DependencyError(f"no results in {out_dir}")
    lines = []
    for path in manifests:
        manifest = import_json(path)
        wall = manifest.get('wall_time_seconds')
        lines.append(f"{manifest['command']}: seed {manifest['seed']}, config {manifest['config_hash'][:12]}, "
                     f"wall time {wall if wall is not None else 'unfinished'}s")
        for key, value in sorted(manifest.get('summary', {}).items()):
            lines.append(f"  {key}: {value}")
        for name, filename in sorted(manifest.get('tables', {}).items()):
            table = out_dir / filename
            if table.exists():
                lines.append(f"  {name}: {len(pd.read_csv(table))} rows ({filename})")
    return lines
