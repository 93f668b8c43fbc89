"""
Result writers for JSON, CSV and XLSX output, and the flat tables they share
"""

from .excel_report import ExcelReportGenerator
from .tables import report_table
from .writers import write_result

__all__ = ['ExcelReportGenerator', 'report_table', 'write_result']
