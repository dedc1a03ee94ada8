"""Paired-measurement decoding of polar codes on binary-input qubit channels."""

from .channel import (
    ChannelParams,
    HelstromResult,
    ResourceLimitError,
    capacity,
    density,
    h2,
    helstrom,
    make_channel,
    psc_to_bscq,
)
from .combine import BranchUpdate, bit_combine, bit_unitary, check_combine, check_unitary
from .decoder import CodeSpec, DecodeTrace, HelstromDecoder, decode, polar_encode, psc_decode
from .density_evolution import (
    Bag,
    DesignResult,
    block_error_bound,
    design,
    exact_de,
    mf_design,
    polar_de,
    select_design,
)
from .experiments import BlockErrorResult, block_error

__version__ = "0.1.0"

__all__ = [
    "Bag",
    "BlockErrorResult",
    "BranchUpdate",
    "ChannelParams",
    "CodeSpec",
    "DecodeTrace",
    "DesignResult",
    "HelstromDecoder",
    "HelstromResult",
    "ResourceLimitError",
    "bit_combine",
    "block_error",
    "block_error_bound",
    "bit_unitary",
    "capacity",
    "check_combine",
    "check_unitary",
    "decode",
    "density",
    "design",
    "exact_de",
    "h2",
    "helstrom",
    "make_channel",
    "mf_design",
    "polar_de",
    "polar_encode",
    "psc_decode",
    "psc_to_bscq",
    "select_design",
]
