import os
from datetime import datetime, timezone

from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet, ParagraphStyle
from reportlab.lib.units import mm
from reportlab.platypus import SimpleDocTemplate, Paragraph, Spacer, Table, TableStyle, HRFlowable

# =============================================================================
# CONFIGURATION CONSTANTS
# =============================================================================

PDF_CONFIG = {
    "page_size": A4,
    "margins": {
        "left": 18 * mm,
        "right": 18 * mm,
        "top": 22 * mm,
        "bottom": 15 * mm
    },
    "fonts": {
        "regular": "Helvetica",
        "bold": "Helvetica-Bold"
    },
    "table_proportions": {
        "label": 0.40,
        "value": 0.60
    }
}

# =============================================================================
# UTILITY FUNCTIONS
# =============================================================================

def format_number(value) -> str:
    """
    Format report values for the tables.

    Args:
        value: Number, boolean, dict with re/im, list or text

    Returns:
        Display string (e.g. "1.000000e-09", "0.0 + 1.0i", "yes")
    """
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6e}" if value and (abs(value) < 1e-3 or abs(value) >= 1e4) else f"{value:.9g}"
    if isinstance(value, complex):
        value = {"re": value.real, "im": value.imag}
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return f"{value['re']:.6g} + {value['im']:.6g}i"
    if isinstance(value, list):
        return ", ".join(format_number(v) for v in value)
    if value is None:
        return "-"
    return str(value)

# =============================================================================
# PDF STYLE DEFINITIONS
# =============================================================================

def create_pdf_styles():
    """
    Create and return all PDF styles used in the document.

    Returns:
        Dictionary containing all paragraph styles
    """
    styles = getSampleStyleSheet()

    section_style = ParagraphStyle(
        "Section",
        parent=styles["Heading4"],
        fontName=PDF_CONFIG["fonts"]["bold"],
        fontSize=13,
        leading=14,
        spaceBefore=10,
        spaceAfter=4,
    )

    label_style = ParagraphStyle(
        "Label",
        parent=styles["Normal"],
        fontName=PDF_CONFIG["fonts"]["bold"],
        fontSize=10,
        leading=11,
    )

    value_style = ParagraphStyle(
        "Value",
        parent=styles["Normal"],
        fontName=PDF_CONFIG["fonts"]["regular"],
        fontSize=10,
        leading=11,
    )

    return {
        "section": section_style,
        "label": label_style,
        "value": value_style
    }

# =============================================================================
# TABLE CREATION HELPERS
# =============================================================================

def create_paragraph_rows(data_rows: list, styles: dict) -> list:
    """
    Convert raw [label, value] rows to Paragraph pairs.
    """
    formatted_rows = []
    for label, value in data_rows:
        label_para = Paragraph(str(label or ""), styles["label"])
        value_para = Paragraph(format_number(value), styles["value"])
        formatted_rows.append([label_para, value_para])
    return formatted_rows

def create_data_table(rows: list, column_widths: list) -> Table:
    table = Table(rows, colWidths=column_widths, hAlign="LEFT")
    table.setStyle(TableStyle([
        ("VALIGN", (0, 0), (-1, -1), "TOP"),
        ("LEFTPADDING", (0, 0), (-1, -1), 2),
        ("RIGHTPADDING", (0, 0), (-1, -1), 2),
        ("TOPPADDING", (0, 0), (-1, -1), 0),
        ("BOTTOMPADDING", (0, 0), (-1, -1), 2),
    ]))
    return table

def create_section_header(title: str, styles: dict) -> list:
    """
    Create a section header with title and horizontal line.
    """
    return [
        Paragraph(title, styles["section"]),
        HRFlowable(
            width="40%",
            thickness=0.2,
            lineCap='round',
            color="black",
            spaceBefore=0,
            spaceAfter=2,
            hAlign='LEFT'
        )
    ]

def section_rows(section: dict) -> list:
    """Flatten one report section into [label, value] rows (nested dicts get dotted labels)."""
    rows = []
    for key, value in section.items():
        if isinstance(value, dict) and set(value) != {"re", "im"}:
            rows.extend([f"{key}.{k}", v] for k, v in section_rows(value))
        else:
            rows.append([key.replace("_", " "), value])
    return rows

# =============================================================================
# PDF GENERATION
# =============================================================================

def create_footer_function(title: str):
    """
    Footer with the report title, generation time and page number.
    """
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M UTC")

    def draw_footer(canvas, doc_obj):
        canvas.saveState()
        canvas.setFont(PDF_CONFIG["fonts"]["regular"], 8)
        canvas.drawString(doc_obj.leftMargin, doc_obj.bottomMargin - 5 * mm, f"{title} - {stamp}")
        canvas.drawRightString(
            doc_obj.pagesize[0] - doc_obj.rightMargin,
            doc_obj.bottomMargin - 5 * mm,
            f"Page {doc_obj.page}"
        )
        canvas.restoreState()

    return draw_footer

def build_certificate_pdf(report: dict, output_path) -> str:
    """
    Render a run report (certificate, commensurability, parity, relations) as tables.

    Args:
        report: JSON-ready report dictionary
        output_path: Output PDF file path

    Returns:
        Path to generated PDF file
    """
    output_path = str(output_path)
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    doc = SimpleDocTemplate(
        output_path,
        pagesize=PDF_CONFIG["page_size"],
        leftMargin=PDF_CONFIG["margins"]["left"],
        rightMargin=PDF_CONFIG["margins"]["right"],
        topMargin=PDF_CONFIG["margins"]["top"],
        bottomMargin=PDF_CONFIG["margins"]["bottom"]
    )
    styles = create_pdf_styles()
    widths = [
        PDF_CONFIG["table_proportions"]["label"] * doc.width,
        PDF_CONFIG["table_proportions"]["value"] * doc.width
    ]
    title = f"State transfer report: {report.get('scenario', 'scenario')}"

    story = create_section_header(title, styles)
    for name in ("certificate", "commensurability", "parity", "relations"):
        section = report.get(name)
        if not section:
            continue
        story.extend(create_section_header(name.capitalize(), styles))
        story.append(create_data_table(create_paragraph_rows(section_rows(section), styles), widths))
        story.append(Spacer(1, 6))

    footer = create_footer_function(title)
    doc.build(story, onFirstPage=footer, onLaterPages=footer)
    return output_path
