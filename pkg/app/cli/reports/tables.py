"""
Tabular views of result models (CSV and XLSX). Column orders are frozen,
see docs/SCHEMAS.md.
"""
from typing import Callable, Dict, Type

import pandas as pd
from pydantic import BaseModel

from app.core.schemas import (BandVerdict, FisherComparison, FreenessReport, HaarConjugationReport,
                              HistogramResult, InvariantReport, PartitionListing, ResidualReport,
                              SemicircleVerdict, ValueReport)


def _freeness(report: FreenessReport) -> pd.DataFrame:
    rows = [{"family": "all", "order": order, "residual": value} for order, value in sorted(report.per_order.items())]
    for family, values in report.families.items():
        rows += [{"family": family, "order": order, "residual": value} for order, value in sorted(values.items())]
    return pd.DataFrame(rows, columns=["family", "order", "residual"])


def _residuals(report: ResidualReport) -> pd.DataFrame:
    return pd.DataFrame(list(report.residuals.items()), columns=["key", "residual"])


def _histogram(result: HistogramResult) -> pd.DataFrame:
    edges = result.bin_edges
    return pd.DataFrame({"bin_left": edges[:-1], "bin_right": edges[1:], "mass": result.masses},
                        columns=["bin_left", "bin_right", "mass"])


def _semicircle(verdict: SemicircleVerdict) -> pd.DataFrame:
    return pd.DataFrame({
        "order": range(1, len(verdict.expected) + 1),
        "expected": verdict.expected,
        "deviation": verdict.deviations,
    }, columns=["order", "expected", "deviation"])


def _band(verdict: BandVerdict) -> pd.DataFrame:
    expected = [1.0] + verdict.semicircle.expected
    return pd.DataFrame({
        "order": range(len(verdict.moments)),
        "moment": verdict.moments,
        "expected": expected[:len(verdict.moments)],
    }, columns=["order", "moment", "expected"])


def _invariants(report: InvariantReport) -> pd.DataFrame:
    return pd.DataFrame(list(report.checks.items()), columns=["check", "residual"])


def _haar(report: HaarConjugationReport) -> pd.DataFrame:
    rows = [{
        "k": step.k,
        "power_norm_1": step.power_norms.get(1),
        "power_norm_2": step.power_norms.get(2),
        "cyclic_moment_deviation": step.cyclic_moment_deviation,
        "mixed_cumulant_residual": step.mixed_cumulant_residual,
    } for step in report.steps]
    return pd.DataFrame(rows, columns=["k", "power_norm_1", "power_norm_2",
                                       "cyclic_moment_deviation", "mixed_cumulant_residual"])


def _fisher(result: FisherComparison) -> pd.DataFrame:
    return pd.DataFrame([
        {"quantity": "phi_D", "value": result.phi_D},
        {"quantity": "phi_B", "value": result.phi_B},
        {"quantity": "residual_D", "value": result.residual_D},
        {"quantity": "residual_B", "value": result.residual_B},
    ], columns=["quantity", "value"])


def _partitions(listing: PartitionListing) -> pd.DataFrame:
    rows = [{"index": i, "blocks": " | ".join(",".join(map(str, b)) for b in p)}
            for i, p in enumerate(listing.partitions)]
    return pd.DataFrame(rows, columns=["index", "blocks"])


def _value(report: ValueReport) -> pd.DataFrame:
    rows = [{"row": i, "col": j, "re": report.re[i][j], "im": report.im[i][j]}
            for i in range(len(report.re)) for j in range(len(report.re[i]))]
    return pd.DataFrame(rows, columns=["row", "col", "re", "im"])


TABLES: Dict[Type[BaseModel], Callable[[BaseModel], pd.DataFrame]] = {
    FreenessReport: _freeness,
    ResidualReport: _residuals,
    HistogramResult: _histogram,
    SemicircleVerdict: _semicircle,
    BandVerdict: _band,
    InvariantReport: _invariants,
    HaarConjugationReport: _haar,
    FisherComparison: _fisher,
    PartitionListing: _partitions,
    ValueReport: _value,
}


def report_table(result: BaseModel) -> pd.DataFrame:
    """The frozen tabular layout of a result model."""
    builder = TABLES.get(type(result))
    if builder is None:
        raise ValueError(f"No tabular layout for {type(result).__name__}")
    return builder(result)
