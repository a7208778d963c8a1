"""Run manifests and the JSON/CSV writers every command shares."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    import pandas as pd

    from blockleague.model import PriorConfig
    from blockleague.sampler import SamplerConfig
    from blockleague.types import JSONDict

logger = logging.getLogger(__name__)

MANIFEST_COMMENT = '# manifest: '


def file_sha256(path: str | Path) -> str:
    """Hex SHA-256 of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class InputFile:
    """An input file as the run saw it: name, absolute path and content hash."""

    name: str
    path: str
    sha256: str

    @classmethod
    def from_path(cls, path: str | Path) -> InputFile:
        """Hash ``path`` and record where it was read from."""
        path = Path(path)
        return cls(name=path.name, path=str(path.resolve()), sha256=file_sha256(path))


def canonical_json(data: Any) -> str:
    """Compact, key-sorted JSON used for hashing."""
    return json.dumps(data, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


@dataclass
class RunManifest:
    """Everything needed to rerun a command, plus what the run observed.

    Only :meth:`reproducibility_fields` enter :attr:`manifest_hash`. Inputs count by name and
    content hash; their paths, wall-clock time, the output directory and acceptance rates do
    not.
    """

    command: str
    version: str
    inputs: tuple[InputFile, ...]
    prior: PriorConfig | None = None
    sampler: SamplerConfig | None = None
    points_per_win: int = 3
    threshold: float = 0.5
    extra: JSONDict = field(default_factory=dict)
    output_dir: str = '.'
    wall_clock_seconds: float = 0.0
    acceptance: dict[str, JSONDict] = field(default_factory=dict)

    def reproducibility_fields(self) -> JSONDict:
        """Inputs (by content hash), configuration and version."""
        return {
            'command': self.command,
            'version': self.version,
            'inputs': {f.name: f.sha256 for f in sorted(self.inputs, key=lambda f: f.name)},
            'prior': None if self.prior is None else dataclasses.asdict(self.prior),
            'sampler': None if self.sampler is None else _without_progress(self.sampler),
            'points_per_win': self.points_per_win,
            'threshold': self.threshold,
            'extra': self.extra,
        }

    @property
    def manifest_hash(self) -> str:
        """SHA-256 of the canonical JSON of the reproducibility fields."""
        return hashlib.sha256(
            canonical_json(self.reproducibility_fields()).encode('utf-8')
        ).hexdigest()

    def to_dict(self) -> JSONDict:
        """Full manifest, hash included."""
        data = self.reproducibility_fields()
        data.update(
            {
                'manifest_hash': self.manifest_hash,
                'input_files': [dataclasses.asdict(f) for f in self.inputs],
                'output_dir': self.output_dir,
                'wall_clock_seconds': round(self.wall_clock_seconds, 3),
                'acceptance': self.acceptance,
            }
        )
        return data


def _without_progress(cfg: SamplerConfig) -> JSONDict:
    fields = dataclasses.asdict(cfg)
    fields.pop('progress', None)
    return fields


def write_json(path: str | Path, data: Any) -> Path:
    """Write indented, key-sorted UTF-8 JSON with a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n', encoding='utf-8'
    )
    logger.debug('wrote %s', path)
    return path


def write_frame(
    path: str | Path, frame: pd.DataFrame, manifest_hash: str | None, *, index: bool = False
) -> Path:
    """Write a CSV table preceded by a ``# manifest: <hash>`` comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as fh:
        if manifest_hash is not None:
            fh.write(f'{MANIFEST_COMMENT}{manifest_hash}\n')
        frame.to_csv(fh, index=index, lineterminator='\n')
    logger.debug('wrote %s', path)
    return path


def read_json(path: str | Path) -> Any:
    """Read a UTF-8 JSON file."""
    return json.loads(Path(path).read_text(encoding='utf-8'))
