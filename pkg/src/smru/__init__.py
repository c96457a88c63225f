"""Hybrid linear-AEC + split-and-merge recurrent UNet echo/noise suppressor."""
from .config import BandLayout, ModelConfig, PostnetConfig
from .frontend import AudioBuffer, StftConfig, istft, read_wav, stft, write_wav
from .laec import KalmanFilterState, LaecConfig, laec_process, laec_step
from .model import smru_forward
from .pipeline import enhance_offline
from .streaming import Stream, stream_create, stream_flush, stream_push
from .weights import WeightStore, init_weights, load_weights, save_weights

__all__ = [
    "AudioBuffer", "BandLayout", "KalmanFilterState", "LaecConfig", "ModelConfig", "PostnetConfig",
    "StftConfig", "Stream", "WeightStore", "enhance_offline", "init_weights", "istft", "laec_process",
    "laec_step", "load_weights", "read_wav", "save_weights", "smru_forward", "stft", "stream_create",
    "stream_flush", "stream_push", "write_wav",
]
