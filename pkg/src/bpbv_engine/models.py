from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence

PASS = "PASS"
FAIL = "FAIL"
UNDECIDED = "UNDECIDED-AT-CUTOFF"
STATUSES = (PASS, FAIL, UNDECIDED)


@dataclass(frozen=True)
class CheckOutcome:
    """
    Outcome of one library-level check (a slice comparison, an identity, a
    batch of certificates).

    ``sizes`` records the dimensions that went into a slice decision so a FAIL
    or UNDECIDED outcome can be read off the report without re-running.
    """

    name: str
    status: str
    detail: str = ""
    sizes: Dict[str, int] = field(default_factory=dict)
    certificate: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.status == PASS


@dataclass(frozen=True)
class CheckRecord:
    """
    One line of a run report.

    ``certificate`` holds the canonical JSON payload of a membership or
    identity certificate when the check produced one; ``detail`` carries the
    counterexample rendering for FAIL and the cutoff explanation for
    UNDECIDED-AT-CUTOFF.
    """

    name: str
    status: str
    certificate: Optional[Dict[str, Any]] = None
    detail: str = ""
    timing_ms: int = 0

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")


@dataclass(frozen=True)
class Report:
    params: Mapping[str, Any]
    checks: Sequence[CheckRecord] = field(default_factory=list)
    outputs: Mapping[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.status == PASS for check in self.checks)

    @property
    def overall_status(self) -> str:
        statuses = {check.status for check in self.checks}
        if FAIL in statuses:
            return FAIL
        if UNDECIDED in statuses:
            return UNDECIDED
        return PASS

    def as_dict(self) -> Dict[str, Any]:
        """
        Convert the nested dataclasses into the stable report schema.

        Field names (``params``, ``checks[].name/status/certificate/timing_ms``)
        are part of the file format and must not change.
        """

        def _serialize(obj: Any) -> Any:
            if isinstance(obj, Report):
                return {
                    "params": _serialize(dict(obj.params)),
                    "checks": [_serialize(check) for check in obj.checks],
                    "outputs": _serialize(dict(obj.outputs)),
                    "status": obj.overall_status,
                }
            if isinstance(obj, CheckRecord):
                return {
                    "name": obj.name,
                    "status": obj.status,
                    "certificate": obj.certificate,
                    "detail": obj.detail,
                    "timing_ms": obj.timing_ms,
                }
            if isinstance(obj, Mapping):
                return {str(key): _serialize(value) for key, value in obj.items()}
            if isinstance(obj, Iterable) and not isinstance(obj, (str, bytes)):
                return [_serialize(item) for item in obj]
            return obj

        return _serialize(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
