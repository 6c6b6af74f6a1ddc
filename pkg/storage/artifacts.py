"""
JSON and CSV artifact writer
"""
import os
import platform
import logging
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, Optional, Union

import pandas as pd

from config.solver_config import OUTPUT_DIR
from utils.helpers import canonical_json

logger = logging.getLogger(__name__)


class ArtifactStore:
    """
    Writes command outputs into one directory

    Primary outputs are canonical (sorted keys, no timestamps) so identical runs
    produce identical bytes; run metadata goes to metadata.json.
    """

    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = os.path.abspath(output_dir or OUTPUT_DIR)
        os.makedirs(self.output_dir, exist_ok=True)

    def path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def write_json(self, filename: str, payload: Any) -> str:
        """Write canonical JSON; returns the file path"""
        filepath = self.path(filename)
        with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
            f.write(canonical_json(payload))
            f.write('\n')
        logger.info(f"Wrote {filepath}")
        return filepath

    def export_to_csv(self, filename: str, rows: Union[pd.DataFrame, Iterable[Dict[str, Any]]]) -> int:
        """
        Export rows to CSV

        Args:
            filename: Output file name inside the store
            rows: DataFrame or iterable of flat dictionaries

        Returns:
            Number of rows exported
        """
        frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
        filepath = self.path(filename)
        frame.to_csv(filepath, index=False, lineterminator='\n')
        logger.info(f"Exported {len(frame)} rows to {filepath}")
        return len(frame)

    def write_metadata(self, command: str, extra: Optional[Dict[str, Any]] = None) -> str:
        """Timestamps and host details, kept out of the primary outputs"""
        payload = {
            "command": command,
            "finished_at": datetime.now(timezone.utc).isoformat(),
            "python": platform.python_version(),
            "host": platform.node(),
            **(extra or {}),
        }
        return self.write_json("metadata.json", payload)
