import logging
import sys

import structlog

from indisup.app.core.config import Settings, settings as default_settings


def configure_logging(cfg: Settings | None = None) -> None:
    """
    Configure structlog once per process.

    Console rendering in development, JSON otherwise. Logs go to stderr so
    stdout stays free for command summaries.
    """
    cfg = cfg or default_settings
    level = logging.getLevelName(cfg.log_level.upper())
    if not isinstance(level, int):
        level = logging.INFO

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.JSONRenderer() if cfg.json_logs
            else structlog.dev.ConsoleRenderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
