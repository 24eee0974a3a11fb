"""
Report serialization.

Files hold only deterministic content so reruns under one seed are
byte-identical.
"""

import json
from pathlib import Path
from typing import Dict

from src.evaluation.protocols import EvalReport


def write_report(report: EvalReport, out_dir, stem: str = "report") -> Dict[str, Path]:
    """
    Write `<stem>.csv` and `<stem>.json`

    Returns:
        {'csv': path, 'json': path}
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    report.to_dataframe().to_csv(csv_path, index=False, float_format="%.10g")
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return {'csv': csv_path, 'json': json_path}
