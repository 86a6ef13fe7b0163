"""
日志配置

格式与各模块的 logger 名一致: "[模块名] 信息"
"""

import logging
import sys

LOG_FORMAT = "[%(name)s] %(message)s"
VERBOSE_FORMAT = "%(asctime)s %(levelname)-7s [%(name)s] %(message)s"


def setup_logging(verbose: bool = False, quiet: bool = False) -> logging.Logger:
    """
    配置根 logger (输出到 stderr)

    Args:
        verbose: DEBUG 级别并带时间戳
        quiet: 只输出 WARNING 及以上

    Returns:
        根 logger
    """
    if verbose:
        level, fmt = logging.DEBUG, VERBOSE_FORMAT
    elif quiet:
        level, fmt = logging.WARNING, LOG_FORMAT
    else:
        level, fmt = logging.INFO, LOG_FORMAT
    logging.basicConfig(level=level, format=fmt, stream=sys.stderr, force=True)
    return logging.getLogger()
