import numpy as np
import pytest

import protocol
from data.models.wire import DistanceReport
from errors import CorruptFrameError, FramingError, ValidationError


def reference_report() -> DistanceReport:
    return DistanceReport(node_id=1, seq=0, timestamp_ms=0, d1=1.0, d2=1.0, d3=1.0)


def test_frame_layout():
    frame = protocol.encode_report(reference_report())
    assert len(frame) == protocol.FRAME_SIZE == 31
    assert frame[0] == 0x01
    assert frame[1:5] == b"\x00\x00\x00\x00"
    assert frame[13:17] == np.float32(1.0).tobytes()


def test_crc_check_value():
    assert protocol.crc16(b"123456789") == 0x29B1


def test_randomized_round_trip_is_bit_exact():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        d = rng.uniform(0.01, 50.0, size=3).astype(np.float32)
        report = DistanceReport(
            node_id=int(rng.integers(1, 3)),
            seq=int(rng.integers(0, 2**32)),
            timestamp_ms=int(rng.integers(0, 2**62)),
            d1=float(d[0]), d2=float(d[1]), d3=float(d[2]),
            flags=int(rng.integers(0, 8)),
        )
        frame = protocol.encode_report(report)
        decoded = protocol.decode_report(frame)
        assert decoded == report
        assert protocol.encode_report(decoded) == frame


def test_every_single_bit_flip_is_rejected():
    frame = protocol.encode_report(DistanceReport(2, 77, 123_456, 1.25, 2.5, 0.75, flags=0b010))
    for bit in range(len(frame) * 8):
        corrupted = bytearray(frame)
        corrupted[bit // 8] ^= 1 << (bit % 8)
        with pytest.raises(CorruptFrameError):
            protocol.decode_report(bytes(corrupted))


@pytest.mark.parametrize("size", [0, 30, 32])
def test_wrong_length_is_a_framing_error(size):
    frame = protocol.encode_report(reference_report())
    data = (frame + b"\x00")[:size]
    with pytest.raises(FramingError):
        protocol.decode_report(data)


def test_report_field_ranges():
    with pytest.raises(ValidationError):
        DistanceReport(node_id=256, seq=0, timestamp_ms=0, d1=1, d2=1, d3=1)
    with pytest.raises(ValidationError):
        DistanceReport(node_id=1, seq=2**32, timestamp_ms=0, d1=1, d2=1, d3=1)
    with pytest.raises(ValidationError):
        DistanceReport(node_id=1, seq=0, timestamp_ms=0, d1=0.0, d2=1, d3=1)
    with pytest.raises(ValidationError):
        DistanceReport(node_id=1, seq=0, timestamp_ms=0, d1=1, d2=float("nan"), d3=1)
    with pytest.raises(ValidationError):
        DistanceReport(node_id=1, seq=0, timestamp_ms=0, d1=1, d2=1, d3=1e-50)


def test_double_precision_distances_round_trip_exactly():
    report = DistanceReport(node_id=1, seq=5, timestamp_ms=500, d1=0.1, d2=2.0 / 3.0, d3=7.123456789)
    assert report.d1 == float(np.float32(0.1))
    assert protocol.decode_report(protocol.encode_report(report)) == report


def test_checksummed_frame_with_zero_distance_is_rejected():
    body = protocol.BODY.pack(2, 0, 0, 0.0, 1.0, 1.0, 0)
    with pytest.raises(ValidationError):
        protocol.decode_report(body + protocol.CRC.pack(protocol.crc16(body)))
