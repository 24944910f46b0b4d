"""
Export the published JSON Schemas.

Writes one file per adapter request/response body, plus the scenario file
and plan document schemas, into OUTPUT_FOLDER.

Note: Re-run whenever a wire or file model changes.
"""

import logging
import os

from services.adapters.schemas import json_schemas, plan_json_schema
from services.harness.cli import setup_logging
from services.harness.scenario import scenario_json_schema
from utils import write_json

# ============================================================================
# CONFIGURATION
# ============================================================================

OUTPUT_FOLDER = "schemas"

logger = logging.getLogger(__name__)


def export_schemas(folder: str = OUTPUT_FOLDER) -> list:
    """Write every schema as <name>.schema.json; returns the written paths."""
    schemas = dict(json_schemas())
    schemas["scenario"] = scenario_json_schema()
    schemas["plan"] = plan_json_schema()

    os.makedirs(folder, exist_ok=True)
    written = []
    for name, schema in sorted(schemas.items()):
        written.append(write_json(os.path.join(folder, f"{name}.schema.json"), schema))
    logger.info(f"Exported {len(written)} schema(s) to {folder}")
    return written


# ============================================================================
# Script entry point
# ============================================================================

if __name__ == "__main__":
    setup_logging()
    export_schemas()
