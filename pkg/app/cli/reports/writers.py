"""
Result serialization: JSON (result plus run configuration), CSV through
pandas with a run sidecar, XLSX through openpyxl.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel

from app.cli.reports.excel_report import ExcelReportGenerator
from app.cli.reports.tables import report_table

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "xlsx")


def write_result(result: BaseModel, path: Path, fmt: str = "json", run: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write one result.

    JSON: {"run": …, "result": …} with sorted keys, so identical runs give
    identical bytes. CSV: the frozen table, plus <name>.run.json.

    Raises:
        ValueError: for an unknown format
    """
    if fmt not in FORMATS:
        raise ValueError(f"Unknown output format {fmt!r}; choose from {FORMATS}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    run = run or {}
    if fmt == "json":
        payload = {"run": run, "result": result.model_dump(mode="json")}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    elif fmt == "csv":
        report_table(result).to_csv(path, index=False)
        sidecar = path.with_suffix(".run.json")
        sidecar.write_text(json.dumps(run, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        path.write_bytes(ExcelReportGenerator(result, run, title=type(result).__name__).generate())
    logger.info(f"✅ Wrote {fmt} report to {path}")
    return path
