"""Wire codec for DistanceReport datagrams.

Frame layout, little-endian, 31 bytes:

    offset  size  field
    0       1     node_id (1 = human, 2 = robot)
    1       4     seq
    5       8     timestamp_ms
    13      4     d1 (float32, metres)
    17      4     d2
    21      4     d3
    25      4     flags
    29      2     CRC-16/CCITT-FALSE over bytes 0..28
"""
import binascii
import struct

from data.models.wire import DistanceReport
from errors import CorruptFrameError, FramingError

BODY = struct.Struct("<BIQfffI")
CRC = struct.Struct("<H")
FRAME_SIZE = BODY.size + CRC.size

CRC_INIT = 0xFFFF


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection)."""
    return binascii.crc_hqx(data, CRC_INIT)


def encode_report(report: DistanceReport) -> bytes:
    body = BODY.pack(report.node_id, report.seq, report.timestamp_ms,
                     report.d1, report.d2, report.d3, report.flags)
    return body + CRC.pack(crc16(body))


def decode_report(frame: bytes) -> DistanceReport:
    if len(frame) != FRAME_SIZE:
        raise FramingError(f"expected {FRAME_SIZE}-byte frame, got {len(frame)}")
    body = frame[:BODY.size]
    (received,) = CRC.unpack(frame[BODY.size:])
    computed = crc16(body)
    if received != computed:
        raise CorruptFrameError(f"checksum mismatch: frame {received:#06x}, computed {computed:#06x}")
    node_id, seq, timestamp_ms, d1, d2, d3, flags = BODY.unpack(body)
    return DistanceReport(node_id=node_id, seq=seq, timestamp_ms=timestamp_ms,
                          d1=d1, d2=d2, d3=d3, flags=flags, checksum=received)
