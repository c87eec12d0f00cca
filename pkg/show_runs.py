#!/usr/bin/env python3
"""
orbitlab run-log summary
Command-line tool showing runs per experiment, last outcome, and mean wall time
"""

import sys
from collections import defaultdict
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from orbitlab.config import config
from orbitlab.models import read_run_log

OUTCOME_KEYS = ("verdict", "passed", "fraction", "mean_score", "persists", "max_residual")


def _outcome(results: Dict[str, Any]) -> str:
    for key in OUTCOME_KEYS:
        if key in results:
            return f"{key}={results[key]}"
    return "-"


def load_run_summary(log_path: Optional[Path] = None) -> Optional[Dict[str, Any]]:
    """Per-experiment counts, last outcome and mean wall time from the run log."""
    log_path = Path(log_path) if log_path is not None else config.out_dir() / config.RUN_LOG
    if not log_path.exists():
        return None

    records = read_run_log(log_path)
    grouped = defaultdict(list)
    for record in records:
        grouped[record.experiment].append(record)

    experiments = {}
    for experiment, runs in sorted(grouped.items()):
        last = runs[-1]
        experiments[experiment] = {
            'runs': len(runs),
            'last_sequence': last.sequence_id,
            'last_outcome': _outcome(last.results),
            'last_run': last.timestamp,
            'mean_wall_time': sum(r.wall_time for r in runs) / len(runs),
        }

    return {
        'log_path': str(log_path),
        'total_runs': len(records),
        'experiments': experiments,
    }


def display_runs(log_path: Optional[Path] = None) -> int:
    """Print the summary in a plain command-line format."""
    print("\norbitlab RUN LOG")
    print("=" * 72)

    summary = load_run_summary(log_path)
    if not summary:
        print("No run log found!")
        print(f"   Looked for {config.out_dir() / config.RUN_LOG}")
        print("   Run `python start.py reproduce <id>` or `python start.py run -c <file>` first")
        return 1

    print(f"Log: {summary['log_path']}")
    print(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"Total runs: {summary['total_runs']}")
    print()

    print(f"{'experiment':<28}{'runs':>6}{'mean s':>10}  last outcome")
    for experiment, row in summary['experiments'].items():
        print(f"{experiment:<28}{row['runs']:>6}{row['mean_wall_time']:>10.2f}  "
              f"{row['last_outcome']} ({row['last_sequence']})")

    print("=" * 72)
    return 0


if __name__ == "__main__":
    sys.exit(display_runs(Path(sys.argv[1]) if len(sys.argv) > 1 else None))
