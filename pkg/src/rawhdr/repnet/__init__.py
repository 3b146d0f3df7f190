from .graph import ArchConfig, ModelGraph, build_dualunet, count_params_flops, fuse_model
from .tcb import Conv3x3, TcbParams, fixed_kernels, tcb_forward, tcb_fuse

__all__ = ["ArchConfig", "ModelGraph", "build_dualunet", "count_params_flops", "fuse_model",
           "Conv3x3", "TcbParams", "fixed_kernels", "tcb_forward", "tcb_fuse"]
