"""Run manifests: reproducibility records written next to every output."""

from __future__ import annotations

import datetime
import hashlib
import json
from dataclasses import dataclass, field

__all__ = ["RunManifest", "sha256_file"]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


@dataclass
class RunManifest:
    """What was run, with what parameters and seed, and what it produced.

    Replaying the same command/parameters/seed reproduces byte-identical
    output files (timestamps live only here, never in outputs).
    """

    command: str
    parameters: dict
    seed: int
    code_version: str
    started: str = field(default_factory=_now)
    finished: str | None = None
    output_digests: dict = field(default_factory=dict)

    def finish(self, outputs: dict[str, str]) -> None:
        """Record sha256 digests for {label: path} outputs and stamp the end."""
        for label, path in outputs.items():
            self.output_digests[label] = sha256_file(path)
        self.finished = _now()

    def to_json(self) -> str:
        return json.dumps({
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "code_version": self.code_version,
            "started": self.started,
            "finished": self.finished,
            "output_digests": self.output_digests,
        }, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        d = json.loads(text)
        return cls(command=d["command"], parameters=d["parameters"],
                   seed=d["seed"], code_version=d["code_version"],
                   started=d["started"], finished=d["finished"],
                   output_digests=d["output_digests"])

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(self.to_json() + "\n")
