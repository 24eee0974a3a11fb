#!/usr/bin/env python3
"""
Directional diffusion command-line entry point

Usage:
    python scripts/ddm.py <train|extract|eval|snr|svdviz|ellipse|sweep> [--config PATH] [--key value ...]

Exit codes:
    0  success
    1  usage or contract error
    2  dataset, schema or checkpoint error
    3  numeric failure or failed invariant check
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.config import configure_logging
from src.errors import (
    CheckpointError, ContractError, DatasetIOError, DDMError, NumericError, SchemaError, UsageError,
)
from src.cli.run_config import COMMANDS, parse_config
from src.cli.commands import COMMAND_TABLE

logger = logging.getLogger("src.cli")

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def print_header(text: str, char: str = "="):
    """Print formatted header"""
    print(f"\n{char * 70}")
    print(f"{text:^70}")
    print(f"{char * 70}\n")


def exit_code_for(error: Exception) -> int:
    """Map a toolkit error to its documented exit code"""
    if isinstance(error, (SchemaError, DatasetIOError, CheckpointError)):
        return EXIT_DATA
    if isinstance(error, NumericError):
        return EXIT_NUMERIC
    return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ddm',
        description='Directional diffusion representations for graphs',
        epilog='Any RunConfig field can be overridden with --key value.',
    )
    parser.add_argument('command', choices=COMMANDS, help='Subcommand to run')
    parser.add_argument('--config', type=str, default=None,
                        help='JSON or key=value config file')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution"""
    parser = build_parser()
    args, overrides = parser.parse_known_args(argv)

    try:
        cfg = parse_config(args.config, overrides)
        configure_logging(cfg.log_level)
        print_header(f"DDM {args.command.upper()}", "=")
        outcome = COMMAND_TABLE[args.command](cfg)
    except (UsageError, ContractError) as e:
        print(f"\n❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except DDMError as e:
        print(f"\n❌ {e}", file=sys.stderr)
        return exit_code_for(e)

    status = "✓ COMPLETE" if outcome.exit_code == 0 else "✗ INVARIANT CHECKS FAILED"
    print_header(status, "=")
    print(f"Artifacts ({len(outcome.artifacts)}):")
    for path in outcome.artifacts:
        print(f"  - {path}")
    print(f"Wall clock: {outcome.seconds:.1f}s")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
