import os
from datetime import datetime
from openpyxl import Workbook
from openpyxl.styles import Font, PatternFill, Alignment, Border, Side
from openpyxl.utils import get_column_letter


COLUMN_ORDER = [
    "fixture",
    "kind",
    "check",
    "expected",
    "actual",
    "Status",
    "detail",
]


STATUS_FILLS = {
    "PASS": PatternFill("solid", start_color="C6EFCE"),
    "FAIL": PatternFill("solid", start_color="F4CCCC"),
}

THIN = Border(*(Side(style="thin") for _ in range(4)))


def write_table(ws, df, start_row):
    headers = [c for c in COLUMN_ORDER if c in df.columns]
    df = df[headers]

    for i, h in enumerate(headers, start=2):
        cell = ws.cell(start_row, i, h)
        cell.font = Font(bold=True)
        cell.border = THIN

    for r, row in enumerate(df.itertuples(index=False), start=start_row + 1):
        for c, val in enumerate(row, start=2):
            cell = ws.cell(r, c, val)
            cell.border = THIN

            if headers[c - 2] == "Status":
                fill = STATUS_FILLS.get(val)
                if fill is not None:
                    cell.fill = fill
                cell.alignment = Alignment(horizontal="center")

    return start_row + len(df) + 2


def write_summary(ws, summary, start_row):
    for r, (k, v) in enumerate(summary.items(), start=start_row):
        ws.cell(r, 2, k).font = Font(bold=True)
        ws.cell(r, 3, v)
    return start_row + len(summary) + 1


def write_corpus_workbook(results, summary, header, out_path):
    """
    Dashboard sheet with the run summary and one row per (fixture, check),
    coloured by status.
    """
    wb = Workbook()
    ws = wb.active
    ws.title = "Dashboard"
    ws.sheet_view.showGridLines = False

    ws["B1"] = header
    ws["B1"].font = Font(size=20, bold=True)

    ws["H1"] = "Affine diameter corpus run"
    ws["H1"].alignment = Alignment(horizontal="right")

    row = write_summary(ws, summary, 3)
    write_table(ws, results, row + 1)

    for col in range(2, ws.max_column + 1):
        ws.column_dimensions[get_column_letter(col)].width = 22

    ws.cell(row=ws.max_row + 2, column=2, value=f"Generated on: {datetime.today().date()}")

    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    wb.save(out_path)
    return out_path
