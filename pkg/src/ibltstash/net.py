"""Length-prefixed request/response exchange of sketch files.

Every message is a 4-byte little-endian length followed by that many bytes.
The client sends one framed request, the server answers with one framed copy
of its sketch file, and both sides close.
"""

from __future__ import annotations

import socket
import struct

REQUEST = b"IBLS-GET"
MAX_FRAME = 1 << 30
_LEN = struct.Struct("<I")


class ProtocolError(Exception):
    pass


def parse_addr(addr: str) -> tuple:
    """'host:port' or ':port' -> (host, port)."""
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected HOST:PORT, got {addr!r}")
    host = host.strip("[]") or "127.0.0.1"
    return host, int(port)


def send_frame(sock: socket.socket, payload: bytes) -> None:
    if len(payload) > MAX_FRAME:
        raise ProtocolError("frame too large")
    sock.sendall(_LEN.pack(len(payload)) + payload)


def recv_exact(sock: socket.socket, size: int) -> bytes:
    buf = bytearray()
    while len(buf) < size:
        chunk = sock.recv(min(size - len(buf), 1 << 16))
        if not chunk:
            raise ProtocolError(f"connection closed after {len(buf)} of {size} bytes")
        buf += chunk
    return bytes(buf)


def recv_frame(sock: socket.socket, limit: int = MAX_FRAME) -> bytes:
    (size,) = _LEN.unpack(recv_exact(sock, _LEN.size))
    if size > limit:
        raise ProtocolError(f"frame of {size} bytes exceeds limit {limit}")
    return recv_exact(sock, size)


def listen(addr: str) -> socket.socket:
    host, port = parse_addr(addr)
    srv = socket.create_server((host, port), reuse_port=False)
    srv.listen()
    return srv


def serve(srv: socket.socket, payload: bytes, max_requests: int | None = None, timeout: float = 30.0) -> int:
    """Answer requests one connection at a time; returns how many were served."""
    served = 0
    while max_requests is None or served < max_requests:
        conn, _ = srv.accept()
        with conn:
            conn.settimeout(timeout)
            try:
                if recv_frame(conn, limit=1024) != REQUEST:
                    continue
                send_frame(conn, payload)
            except (ProtocolError, OSError):
                continue
        served += 1
    return served


def fetch(addr: str, timeout: float = 30.0) -> bytes:
    host, port = parse_addr(addr)
    with socket.create_connection((host, port), timeout=timeout) as sock:
        send_frame(sock, REQUEST)
        return recv_frame(sock)
