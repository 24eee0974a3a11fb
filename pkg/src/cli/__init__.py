from .run_config import COMMANDS, RunConfig, parse_config, parse_int_list, parse_overrides, read_config_file
from .commands import (
    COMMAND_TABLE, CommandOutcome, cmd_ellipse, cmd_eval, cmd_extract, cmd_snr, cmd_svdviz, cmd_sweep,
    cmd_train, load_run_dataset,
)

__all__ = [
    'COMMANDS', 'RunConfig', 'parse_config', 'parse_int_list', 'parse_overrides', 'read_config_file',
    'COMMAND_TABLE', 'CommandOutcome', 'cmd_ellipse', 'cmd_eval', 'cmd_extract', 'cmd_snr', 'cmd_svdviz',
    'cmd_sweep', 'cmd_train', 'load_run_dataset',
]
