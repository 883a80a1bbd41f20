"""Dense TV-L1 optical flow, flow stacking, visualization, and EPE."""
from .backend import BACKEND_NAME, COMPILED, available_backends
from .floio import FlowFormatError, load_flow, save_flow
from .metrics import endpoint_error
from .stack import (
    DEFAULT_STACK_LEN,
    FLOW_CLAMP_PX,
    StackedFlow,
    stack_flows,
    stack_to_input,
    zero_stack,
)
from .tvl1 import (
    FAST_PARAMS,
    FlowField,
    Tvl1Params,
    to_gray,
    tvl1_energy,
    tvl1_flow,
    tvl1_flow_gray,
)
from .viz import flow_colorize

__all__ = [
    "BACKEND_NAME",
    "COMPILED",
    "DEFAULT_STACK_LEN",
    "FAST_PARAMS",
    "FLOW_CLAMP_PX",
    "FlowField",
    "FlowFormatError",
    "StackedFlow",
    "Tvl1Params",
    "available_backends",
    "endpoint_error",
    "flow_colorize",
    "load_flow",
    "save_flow",
    "stack_flows",
    "stack_to_input",
    "to_gray",
    "tvl1_energy",
    "tvl1_flow",
    "tvl1_flow_gray",
    "zero_stack",
]
