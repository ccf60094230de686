from vbgdetect.imaging.codec import encode_jpeg, load_frame, save_frame
from vbgdetect.imaging.frame import (
    ChannelPlane,
    Frame,
    quantize,
    recompose,
    split_channels,
    to_luma,
)

__all__ = [
    "ChannelPlane",
    "Frame",
    "encode_jpeg",
    "load_frame",
    "quantize",
    "recompose",
    "save_frame",
    "split_channels",
    "to_luma",
]
