"""
应用设置管理

使用 QSettings 实现跨平台的持久化配置存储 (输出根目录、默认线程数)
"""

import os
from typing import Optional

from PySide6.QtCore import QSettings


class AppSettings:
    """
    应用设置管理类

    使用 QSettings INI 格式存储持久化配置：
    - Windows: %APPDATA% 下的 INI 文件
    - macOS / Linux: ~/.config 目录下的配置文件
    """

    # 应用标识
    ORGANIZATION = "BlastSim"
    APPLICATION = "blastsim"

    # 设置键名
    KEY_OUTPUT_ROOT = "output/root"
    KEY_WORKERS = "run/workers"

    DEFAULT_OUTPUT_ROOT = "output"

    def __init__(self, path: Optional[str] = None):
        """
        初始化设置管理器

        Args:
            path: 显式指定的 INI 文件 (测试用)，None 表示用户级默认位置
        """
        if path is not None:
            self._settings = QSettings(path, QSettings.IniFormat)
        else:
            self._settings = QSettings(
                QSettings.IniFormat,
                QSettings.UserScope,
                self.ORGANIZATION,
                self.APPLICATION
            )

    @property
    def output_root(self) -> str:
        """
        获取输出根目录

        Returns:
            未设置时为 "output" (相对于当前工作目录)
        """
        directory = self._settings.value(self.KEY_OUTPUT_ROOT, "")
        return str(directory) if directory else self.DEFAULT_OUTPUT_ROOT

    @output_root.setter
    def output_root(self, directory: str):
        if directory:
            self._settings.setValue(self.KEY_OUTPUT_ROOT, os.path.abspath(directory))
            self._settings.sync()  # 立即写入存储

    @property
    def workers(self) -> Optional[int]:
        """
        获取默认工作线程数

        Returns:
            未设置或无法解析时为 None
        """
        value = self._settings.value(self.KEY_WORKERS)
        if value is None or value == "":
            return None
        try:
            return max(1, int(value))
        except (ValueError, TypeError):
            return None

    @workers.setter
    def workers(self, workers: Optional[int]):
        if workers is None:
            self._settings.remove(self.KEY_WORKERS)
        else:
            self._settings.setValue(self.KEY_WORKERS, int(workers))
        self._settings.sync()

    def run_directory(self, scenario_name: str) -> str:
        """场景未指定输出目录时使用 <输出根目录>/<场景名>"""
        return os.path.join(self.output_root, scenario_name)

    def clear(self):
        """清除全部设置"""
        self._settings.remove(self.KEY_OUTPUT_ROOT)
        self._settings.remove(self.KEY_WORKERS)
        self._settings.sync()

    def get_settings_file_path(self) -> str:
        """
        获取设置文件的路径（用于调试）

        Returns:
            设置文件的完整路径
        """
        return self._settings.fileName()


# 单例模式 - 全局设置实例
_app_settings = None


def get_settings() -> AppSettings:
    """
    获取全局设置实例

    Returns:
        AppSettings 实例
    """
    global _app_settings
    if _app_settings is None:
        _app_settings = AppSettings()
    return _app_settings
