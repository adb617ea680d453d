"""
Output files of a run - CSV tables, text reports, eigenvector dumps and the
run manifest

CSV files start with a '#'-prefixed metadata block followed by a plain
header row; floats are written with 12 significant digits so that identical
inputs give identical bytes.
"""

import hashlib
import logging
import platform
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
import yaml

from decoupler.fock import LabeledSpectrum, format_label

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
MANIFEST_NAME = "manifest.yaml"


def _plain(value: Any) -> Any:
    """numpy scalars/arrays and tuples to YAML-safe Python values."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, Path):
        return str(value)
    return value


def _metadata_value(value: Any) -> str:
    value = _plain(value)
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    if isinstance(value, list):
        return "[" + ", ".join(_metadata_value(v) for v in value) + "]"
    return str(value)


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_csv(
    path: Path,
    rows: Sequence[Mapping[str, Any]],
    metadata: Optional[Mapping[str, Any]] = None,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    """
    Write rows as CSV with a '#' metadata block.

    Args:
        path: Target file
        rows: One mapping per row; missing keys are written as nan
        metadata: Written as '# key: value' lines before the header
        columns: Column order (default: keys of the first row)
    """
    path = Path(path)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    frame = pd.DataFrame(list(rows), columns=list(columns))
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in (metadata or {}).items():
            f.write(f"# {key}: {_metadata_value(value)}\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    """Read a CSV written by write_csv, skipping the metadata block."""
    return pd.read_csv(path, comment="#")


def read_metadata(path: Path) -> Dict[str, str]:
    metadata = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            metadata[key] = value
    return metadata


def eigenvector_dump(labeled: LabeledSpectrum, labels: Iterable[Sequence[int]]) -> str:
    """
    Textual dump of labeled eigenvectors.

    Each block starts with '# label eigenindex energy_GHz weight', followed
    by one 'index real imag' line per basis state.
    """
    lines = []
    for label in labels:
        index = labeled.eigenindex(label)
        vector = labeled.vector(label)
        energy = labeled.energy(label) / (2.0 * np.pi)
        lines.append(
            f"# {format_label(label)} {index} {FLOAT_FORMAT % energy} {FLOAT_FORMAT % labeled.weight(label)}"
        )
        for row, amplitude in enumerate(vector):
            lines.append(f"{row} {FLOAT_FORMAT % amplitude.real} {FLOAT_FORMAT % amplitude.imag}")
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    """Everything needed to reproduce a run, plus digests of what it wrote."""

    command: str
    config: Dict[str, Any]
    version: str
    settings: Dict[str, Any] = field(default_factory=dict)
    run_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    wall_clock_s: float = 0.0
    files: Dict[str, str] = field(default_factory=dict)
    operations: List[Dict[str, Any]] = field(default_factory=list)
    status: str = "running"

    def to_dict(self) -> Dict[str, Any]:
        return _plain(
            {
                "run_id": self.run_id,
                "command": self.command,
                "version": self.version,
                "status": self.status,
                "started": self.started,
                "wall_clock_s": round(self.wall_clock_s, 3),
                "python": platform.python_version(),
                "numpy": np.__version__,
                "settings": self.settings,
                "config": self.config,
                "files": self.files,
                "operations": self.operations,
            }
        )


class ArtifactWriter:
    """
    Writes a run's outputs into one directory and keeps the manifest.

    Usage:
        writer = ArtifactWriter(out_dir, manifest)
        writer.csv("crosstalk.csv", rows, metadata)
        writer.finish()
    """

    def __init__(self, directory: Path, manifest: RunManifest):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest
        self._start = time.monotonic()

    def _record(self, path: Path) -> Path:
        self.manifest.files[path.name] = file_digest(path)
        logger.info(f"Wrote {path}")
        return path

    def csv(
        self,
        name: str,
        rows: Sequence[Mapping[str, Any]],
        metadata: Optional[Mapping[str, Any]] = None,
        columns: Optional[Sequence[str]] = None,
    ) -> Path:
        return self._record(write_csv(self.directory / name, rows, metadata, columns))

    def text(self, name: str, content: str) -> Path:
        path = self.directory / name
        path.write_text(content, encoding="utf-8")
        return self._record(path)

    def add_operation(self, summary: Dict[str, Any]) -> None:
        """Record an OperationLogger summary; its JSON-lines file gets a digest too."""
        self.manifest.operations.append(summary)
        log_file = summary.get("log_file")
        if log_file and Path(log_file).exists():
            self._record(Path(log_file))

    def finish(self, status: str = "ok") -> Path:
        """Write manifest.yaml; its own digest is not part of it."""
        self.manifest.status = status
        self.manifest.wall_clock_s = time.monotonic() - self._start
        path = self.directory / MANIFEST_NAME
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.manifest.to_dict(), f, sort_keys=False, default_flow_style=False)
        logger.info(f"Run manifest: {path}")
        return path
