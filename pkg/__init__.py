"""
BlastSim 爆炸模拟器
体素网格上的可压缩粘性流动、流固耦合与后处理效果 (折射、火球示踪、粉尘)
"""

__version__ = "1.0.0"
