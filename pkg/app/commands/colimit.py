"""colimit: validate an imported claim DAG and write the glued classes."""
from __future__ import annotations

import logging
from pathlib import Path

from app.commands.context import RunContext
from app.commands.schemas import CheckerSection, ColimitConfig
from app.services.reasoning_dag import (
    Checker,
    Status,
    accept_all,
    colimit,
    format_colimit,
    parse_dag,
    reject_ids,
    threshold_checker,
    validate,
)

logger = logging.getLogger(__name__)


def build_checker(section: CheckerSection) -> Checker:
    if section.kind == "reject_ids":
        return reject_ids(section.ids)
    if section.kind == "threshold":
        return threshold_checker
    return accept_all


def run(config: ColimitConfig, ctx: RunContext) -> list[Path]:
    dag = parse_dag(config.dag.read_text(encoding="utf-8"))
    checked = validate(dag, build_checker(config.checker))
    rejected = sorted(nid for nid, node in checked.nodes.items() if node.status is Status.REJECTED)
    if rejected:
        logger.info("rejected claims: %s", ", ".join(rejected))
    result = colimit(checked)
    text = format_colimit(result)
    for line in text.splitlines():
        logger.info("%s", line)
    out = ctx.out_dir / "colimit.txt"
    out.write_text(text, encoding="utf-8")
    return [out]
