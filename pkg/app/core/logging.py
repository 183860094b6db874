"""
Logging setup shared by the API and the CLI.

Log records go to stderr so that CLI results on stdout stay byte-identical
between runs.
"""
import logging.config

LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"


def setup_logging(level: str = "INFO") -> None:
    """
    Configure the root logger and the ``app`` logger hierarchy.

    Args:
        level: Level name for the ``app`` loggers (e.g. "INFO", "DEBUG")
    """
    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "generic": {"format": LOG_FORMAT},
            },
            "handlers": {
                "console": {
                    "class": "logging.StreamHandler",
                    "formatter": "generic",
                    "stream": "ext://sys.stderr",
                },
            },
            "loggers": {
                "app": {"level": level.upper(), "handlers": ["console"], "propagate": False},
                "uvicorn": {"level": "INFO"},
            },
            "root": {"level": "WARNING", "handlers": ["console"]},
        }
    )
