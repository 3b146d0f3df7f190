"""Raw-domain dual-exposure HDR toolkit."""

from .raw import BayerImage, PackedRaw, naive_rgb, normalize_levels, pack_bayer, rgb_to_lab, unpack_bayer

__all__ = ["BayerImage", "PackedRaw", "naive_rgb", "normalize_levels", "pack_bayer", "rgb_to_lab",
           "unpack_bayer"]
__version__ = "0.1.0"
