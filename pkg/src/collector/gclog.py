"""Line-delimited JSON log of collections."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.collector.reports import CollectionEvent, GcReport
from src.utils.errors import GcLogFormatError
from src.utils.logger import get_logger

logger = get_logger(__name__)


class GcLog:
    """One ``run`` header record, one ``gc`` record per collection, one ``summary`` footer."""

    def __init__(self, run_info: Optional[Dict[str, Any]] = None):
        self.run_info: Dict[str, Any] = dict(run_info or {})
        self.reports: List[GcReport] = []
        self.summary: Dict[str, Any] = {}

    def attach(self, collector):
        collector.add_listener(self._on_collection)

    def _on_collection(self, event: CollectionEvent):
        if event.report is not None:
            self.reports.append(event.report)

    def finish(
        self,
        ops_completed: int,
        max_regions_in_use: int,
        valid: bool = True,
        error: Optional[str] = None,
        elapsed_s: Optional[float] = None
    ):
        """Set the summary footer. Leave elapsed_s unset for byte-identical logs."""
        self.summary = {
            "ops_completed": ops_completed,
            "max_regions_in_use": max_regions_in_use,
            "valid": valid,
        }
        if error:
            self.summary["error"] = error
        if elapsed_s is not None:
            self.summary["elapsed_s"] = elapsed_s

    def records(self) -> List[Dict[str, Any]]:
        records = [{"record": "run", **self.run_info}]
        records.extend({"record": "gc", **report.to_dict()} for report in self.reports)
        if self.summary:
            records.append({"record": "summary", **self.summary})
        return records

    def dumps(self) -> str:
        return "".join(json.dumps(record) + "\n" for record in self.records())

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        logger.info(f"Wrote GC log with {len(self.reports)} collections to {path}")
        return path

    @classmethod
    def loads(cls, text: str) -> "GcLog":
        log = cls()
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                kind = record.pop("record")
                if kind == "run":
                    log.run_info = record
                elif kind == "gc":
                    log.reports.append(GcReport.from_dict(record))
                elif kind == "summary":
                    log.summary = record
                else:
                    raise GcLogFormatError(f"line {number}: unknown record type {kind!r}")
            except (ValueError, KeyError, TypeError) as exc:
                raise GcLogFormatError(f"line {number}: {exc}") from exc
        return log

    @classmethod
    def read(cls, path: Union[str, Path]) -> "GcLog":
        path = Path(path)
        if not path.exists():
            raise GcLogFormatError(f"{path} does not exist")
        return cls.loads(path.read_text(encoding="utf-8"))
