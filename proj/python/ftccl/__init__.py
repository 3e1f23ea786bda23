"""Distributed union-find connected component labeling and feature tracking.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from ._ftccl import (
    FtcclError,
    ccl,
    decode_vertex_id,
    encode_vertex_id,
    generate,
    kd_partition,
    oracle,
    read_volume,
    track,
    write_volume,
)

__all__ = [
    "FtcclError",
    "ccl",
    "decode_vertex_id",
    "encode_vertex_id",
    "generate",
    "kd_partition",
    "oracle",
    "read_volume",
    "track",
    "write_volume",
]
