"""Experiment manifests: serialized run descriptions with content hashes.

The hash covers the semantic fields (command, parameters, master seed,
tool version) and is embedded in every output file; thread count and
output paths are recorded but excluded from the hash because results are
independent of them by design.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

from . import __version__


@dataclass(frozen=True)
class ExperimentManifest:
    command: str
    params: dict
    seed: int
    threads: int
    outputs: tuple
    version: str = __version__

    @property
    def content_hash(self) -> str:
        payload = json.dumps(
            {
                "command": self.command,
                "params": self.params,
                "seed": self.seed,
                "version": self.version,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_json(self) -> str:
        d = asdict(self)
        d["outputs"] = list(self.outputs)
        d["content_hash"] = self.content_hash
        return json.dumps(d, sort_keys=True, indent=2)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def fmt(x) -> str:
    """Stable float formatting for byte-identical CSV output."""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path, manifest: ExperimentManifest, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(f"# manifest={manifest.content_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
