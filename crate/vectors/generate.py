#!/usr/bin/env python3
"""Writes the curated test vectors: NAME.bin plus a NAME.expect sidecar."""

import struct
from pathlib import Path

ROOT = Path(__file__).resolve().parent
DST = bytes([0xFF] * 6)
SRC = bytes([0x00, 0x11, 0x22, 0x33, 0x44, 0x55])


def ipv4(total_length):
    header = struct.pack(
        ">BBHHHBBH4s4s", 0x45, 0, total_length, 1, 0x4000, 64, 17, 0, bytes([10, 0, 0, 1]), bytes([10, 0, 0, 2])
    )
    return header + bytes(range(total_length - len(header)))


def frame(type_length, payload, tag=None):
    head = DST + SRC
    if tag is not None:
        head += struct.pack(">HH", 0x8100, tag)
    return head + struct.pack(">H", type_length) + payload


def heartbeat(message_type, payload_length, payload, padding):
    return struct.pack(">BH", message_type, payload_length) + bytes([0x5A] * payload) + bytes([0xA5] * padding)


ETHERNET = [
    ("ethernet_ii_ipv4", frame(0x0800, ipv4(46)), True, [("Type_Length", 0x0800)]),
    ("ieee_802_3_length_46", frame(46, bytes(46)), True, [("Type_Length", 46)]),
    ("vlan_tagged", frame(0x0800, ipv4(46), tag=0x002A), True, [("TPID", 0x8100), ("TCI", 42), ("Type_Length", 0x0800)]),
    ("ethernet_ii_ipv6", frame(0x86DD, bytes(46)), True, [("Type_Length", 0x86DD)]),
    ("type_length_1501", frame(1501, bytes(46)), False, []),
    ("payload_1501_bytes", frame(0x0800, bytes(1501)), False, []),
    ("truncated_header", (DST + SRC)[:10], False, []),
]

HEARTBEAT = [
    ("request_padding_16", heartbeat(1, 4, 4, 16), True, [("Message_Type", 1), ("Payload_Length", 4)]),
    ("response", heartbeat(2, 8, 8, 20), True, [("Message_Type", 2), ("Payload_Length", 8)]),
    ("message_type_3", heartbeat(3, 4, 4, 16), False, []),
    ("padding_15", heartbeat(1, 4, 4, 15), False, []),
    # Claims 1000 payload bytes in a 23-byte record.
    ("heartbleed", heartbeat(1, 1000, 4, 16), False, []),
    ("payload_length_out_of_range", heartbeat(1, 16365, 16365, 16), False, []),
]


def write(directory, vectors):
    directory.mkdir(exist_ok=True)
    for name, data, valid, fields in vectors:
        (directory / f"{name}.bin").write_bytes(data)
        lines = [f"expect: {'valid' if valid else 'invalid'}"]
        lines += [f"field: {f} expect_value: {v}" for f, v in fields]
        (directory / f"{name}.expect").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    write(ROOT / "ethernet", ETHERNET)
    write(ROOT / "tls_heartbeat", HEARTBEAT)
