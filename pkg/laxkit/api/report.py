import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from ..models import Check, RunConfig


def dumps(payload: Any) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def inputs_hash(command: str, run: RunConfig, window: Tuple[int, int], seed: int) -> str:
    canonical = {"command": command, "config": run.canonical(), "window": list(window), "seed": seed}
    return hashlib.sha256(json.dumps(canonical, sort_keys=True, separators=(",", ":")).encode("utf-8")).hexdigest()


class Report(BaseModel):
    command: str
    config_name: str
    inputs_hash: str
    window: Tuple[int, int]
    seed: int
    checks: List[Check] = Field(default_factory=list)
    adjustments: List[Dict[str, Any]] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    timing: Optional[Dict[str, float]] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> Dict[str, Any]:
        payload = self.model_dump(mode="json", exclude_none=True)
        payload["verdict"] = "PASS" if self.passed else "FAIL"
        return payload

    def write(self, out_dir: Path, artifacts: Dict[str, Any]) -> Path:
        """Writes every artifact and then report.json; returns the report path."""
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in sorted(artifacts):
            (out_dir / name).write_text(dumps(artifacts[name]), encoding="utf-8")
            if name not in self.artifacts:
                self.artifacts.append(name)
        self.artifacts.sort()
        path = out_dir / "report.json"
        path.write_text(dumps(self.to_json()), encoding="utf-8")
        return path
