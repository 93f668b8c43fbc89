"""
Excel export of result models: a summary sheet with the verdict and the
run configuration, plus the frozen table of the result.
"""

from io import BytesIO
from typing import Any, Dict, Optional

from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill
from pydantic import BaseModel

from app.cli.reports.tables import report_table

HEADER_FILL = PatternFill(start_color='4472C4', end_color='4472C4', fill_type='solid')
PASS_COLOR = '2E7D32'
FAIL_COLOR = 'C62828'


class ExcelReportGenerator:
    """Workbook with a Summary sheet and a Data sheet for one result"""

    def __init__(self, result: BaseModel, run: Optional[Dict[str, Any]] = None, title: str = 'opfree report'):
        """
        Args:
            result: any result model with a tabular layout
            run: resolved run configuration, written to the summary
            title: heading of the summary sheet
        """
        self.result = result
        self.run = run or {}
        self.title = title
        self.wb = Workbook()

    def generate(self) -> bytes:
        """Builds both sheets and returns the workbook bytes"""
        if 'Sheet' in self.wb.sheetnames:
            del self.wb['Sheet']
        self._create_summary_sheet()
        self._create_data_sheet()
        return self._save_to_bytes()

    def _create_summary_sheet(self):
        sheet = self.wb.create_sheet('Summary', 0)

        sheet['A1'] = self.title
        sheet['A1'].font = Font(size=16, bold=True, color='FFFFFF')
        sheet['A1'].fill = HEADER_FILL
        sheet.merge_cells('A1:C1')
        sheet['A1'].alignment = Alignment(horizontal='center', vertical='center')
        sheet.row_dimensions[1].height = 28

        row = 3
        verdict = getattr(self.result, 'verdict', None)
        if verdict is not None:
            value = getattr(verdict, 'value', str(verdict))
            sheet[f'A{row}'] = 'Verdict:'
            sheet[f'A{row}'].font = Font(bold=True)
            sheet[f'B{row}'] = value
            color = PASS_COLOR if value == 'pass' else FAIL_COLOR
            sheet[f'B{row}'].font = Font(size=14, bold=True, color=color)
            row += 2

        sheet[f'A{row}'] = 'Run configuration'
        sheet[f'A{row}'].font = Font(size=12, bold=True)
        row += 1
        for key, value in self.run.items():
            sheet[f'A{row}'] = key
            sheet[f'B{row}'] = '' if value is None else str(value)
            row += 1

        sheet.column_dimensions['A'].width = 24
        sheet.column_dimensions['B'].width = 40

    def _create_data_sheet(self):
        sheet = self.wb.create_sheet('Data')
        table = report_table(self.result)
        for col, name in enumerate(table.columns, start=1):
            cell = sheet.cell(row=1, column=col, value=str(name))
            cell.font = Font(bold=True, color='FFFFFF')
            cell.fill = HEADER_FILL
            cell.alignment = Alignment(horizontal='center')
        for r, record in enumerate(table.itertuples(index=False), start=2):
            for col, value in enumerate(record, start=1):
                sheet.cell(row=r, column=col, value=value.item() if hasattr(value, 'item') else value)

    def _save_to_bytes(self) -> bytes:
        buffer = BytesIO()
        self.wb.save(buffer)
        buffer.seek(0)
        return buffer.read()
