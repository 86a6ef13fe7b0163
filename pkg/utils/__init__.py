"""工具模块"""

from .image_saver import ImageSaver, encode_png, read_png_text, render_slice
from .log import setup_logging
from .settings import AppSettings, get_settings

__all__ = [
    'ImageSaver',
    'encode_png',
    'read_png_text',
    'render_slice',
    'setup_logging',
    'AppSettings',
    'get_settings',
]
