"""Run manifests: machine-readable records of every CLI invocation."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field


@dataclass
class RunManifest:
    command: str
    parameters: dict = field(default_factory=dict)
    statistics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    version: str = ""

    def add_artifact(self, path: str) -> None:
        name = os.path.basename(path)
        if name not in self.artifacts:
            self.artifacts.append(name)

    def add_timing(self, name: str, seconds: float) -> None:
        self.timings[name] = seconds

    def write(self, out_dir: str) -> str:
        if not self.version:
            from . import __version__
            self.version = __version__
        path = os.path.join(out_dir, "manifest.json")
        payload = {
            "command": self.command,
            "version": self.version,
            "parameters": self.parameters,
            "statistics": self.statistics,
            "artifacts": sorted(self.artifacts),
            "timings": self.timings,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def read_manifest(out_dir: str) -> dict:
    path = os.path.join(out_dir, "manifest.json")
    if not os.path.exists(path):
        raise FileNotFoundError(f"no manifest.json under {out_dir}")
    with open(path) as fh:
        return json.load(fh)
