from __future__ import annotations

import json
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from ..class_graph import ClassSet
    from ..report import CheckReport


def _indent(text: str, indent_level: int) -> str:
    indent_string = "  " * indent_level
    return "\n".join(f"{indent_string}{line}" for line in text.splitlines())


def pretty_print_report(report: CheckReport) -> str:
    output = f"CheckReport({report.check}):"
    output += f"\n- Status: {report.status}"
    output += f"\n- Cases: {report.cases_total - report.cases_failed}/{report.cases_total} passed"
    if report.first_failure is not None:
        output += (
            "\n- First failure:\n"
            f"{_indent(json.dumps(report.first_failure, sort_keys=True, indent=2), 2)}"
        )
    if report.data:
        output += f"\n- {len(report.data)} data field(s): {', '.join(sorted(report.data))}"
    output += "\n(See the JSON report for more details)"
    return output


def pretty_print_class_set(class_set: ClassSet) -> str:
    output = f"ClassSet(p={class_set.p}):"
    for idx, cls in enumerate(class_set.classes):
        output += (
            f"\n- E{idx + 1}: w={cls.w}, N(I)={cls.ideal_norm}, "
            f"ternary det={cls.ternary_det}"
        )
    output += f"\n- Mass: {class_set.mass}"
    return output
