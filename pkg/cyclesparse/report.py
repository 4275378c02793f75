"""Verification reports written by the command line interface."""
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, validator

from .exceptions import InvalidInputValue, MissingItems

SCHEMA = "cyclesparse-report/1"
SIGNIFICANT_DIGITS = 12

__all__ = ["ApproxReport", "round_floats", "sha256_hex", "read_report"]


def round_floats(obj: Any, digits: int = SIGNIFICANT_DIGITS) -> Any:
    """Round every float in a nested structure to ``digits`` significant digits.

    Examples
    --------
    >>> round_floats({"a": [1 / 3, 2]}, 4)
    {'a': [0.3333, 2]}
    """
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def sha256_hex(data: Union[bytes, str]) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


class ApproxReport(BaseModel):
    """Record of one command line run.

    Parameters
    ----------
    command : str
        Subcommand name.
    argv : list of str
        Arguments that replay the run, without report, output and logging options.
    seed : int
        Seed of all random streams.
    input_sha256 : str
        Digest of the input bytes.
    output_sha256 : str, optional
        Digest of the output document.
    flags : dict
        Parameter values of the run.
    edge_counts : list of int
        Edge counts per round, starting with the input.
    checks : dict
        Named invariants and whether they passed.
    metrics : dict
        Measured quantities such as certificates, cycle counts and size constants.
    wall_clock : float, optional
        Seconds spent, only recorded on request.
    """

    schema_version: str = SCHEMA
    command: str
    argv: List[str]
    seed: int
    input_sha256: str
    output_sha256: Optional[str] = None
    flags: Dict[str, Any] = {}
    edge_counts: List[int] = []
    checks: Dict[str, bool] = {}
    metrics: Dict[str, Any] = {}
    wall_clock: Optional[float] = None

    @validator("schema_version")
    def _valid_schema(cls, v):
        if v != SCHEMA:
            raise InvalidInputValue("schema_version", [SCHEMA])
        return v

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failed_checks(self) -> List[str]:
        return sorted(k for k, ok in self.checks.items() if not ok)

    def to_json(self) -> str:
        """Canonical document: sorted keys, rounded floats, trailing newline."""
        data = round_floats(self.dict())
        return json.dumps(data, sort_keys=True, indent=2) + "\n"

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json())


def read_report(path: Union[str, Path]) -> ApproxReport:
    """Load a report, checking the fields a replay needs."""
    data = json.loads(Path(path).read_text())
    missing = [k for k in ("command", "argv", "seed", "input_sha256") if k not in data]
    if missing:
        raise MissingItems(missing)
    return ApproxReport(**data)
