"""Value models shared by the positioning, network and learning layers"""
from .frames import DatasetRow, EstimatedFrame, GroundTruthFrame
from .location import AnchorLayout, DistanceVector, Position
from .ml import EvalMetrics, FeatureRow, LinearModel, Prediction, TrainConfig
from .radio import NoiseConfig, PathLossParams, RssiSample
from .wire import ChannelConfig, DistanceReport, NavSignal

__all__ = [
    'AnchorLayout',
    'ChannelConfig',
    'DatasetRow',
    'DistanceReport',
    'DistanceVector',
    'EstimatedFrame',
    'EvalMetrics',
    'FeatureRow',
    'GroundTruthFrame',
    'LinearModel',
    'NavSignal',
    'NoiseConfig',
    'PathLossParams',
    'Position',
    'Prediction',
    'RssiSample',
    'TrainConfig',
]
