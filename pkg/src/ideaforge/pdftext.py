"""Plain-text extraction from PDF byte streams.

Covers the common classic-PDF layout: uncompressed or FlateDecode content
streams and literal/hex string show operators (Tj, TJ, ', "). Object streams
(PDF 1.5 cross-reference compression) and encrypted files are out of scope
and surface as PdfUnreadable.
"""

from __future__ import annotations

import base64
import re
import zlib

from .errors import PdfUnreadable

_OBJ_RE = re.compile(rb"(\d+)\s+\d+\s+obj\b(.*?)endobj", re.DOTALL)
_REF_RE = re.compile(rb"(\d+)\s+\d+\s+R")
_ESCAPES = {
    b"n": b"\n", b"r": b"\r", b"t": b"\t", b"b": b"\b", b"f": b"\f",
    b"(": b"(", b")": b")", b"\\": b"\\",
}


def _objects(data: bytes) -> dict[int, bytes]:
    return {int(m.group(1)): m.group(2) for m in _OBJ_RE.finditer(data)}


def _page_numbers(objects: dict[int, bytes]) -> list[int]:
    """Page object numbers in page-tree order, falling back to object order."""
    catalog = None
    for body in objects.values():
        if re.search(rb"/Type\s*/Catalog\b", body):
            catalog = body
            break
    ordered: list[int] = []
    if catalog is not None:
        root = re.search(rb"/Pages\s+(\d+)\s+\d+\s+R", catalog)
        if root is not None:
            stack = [int(root.group(1))]
            seen: set[int] = set()
            while stack:
                num = stack.pop(0)
                if num in seen or num not in objects:
                    continue
                seen.add(num)
                body = objects[num]
                if re.search(rb"/Type\s*/Pages\b", body):
                    kids = re.search(rb"/Kids\s*\[([^\]]*)\]", body)
                    if kids is not None:
                        children = [int(m.group(1)) for m in _REF_RE.finditer(kids.group(1))]
                        stack = children + stack
                elif re.search(rb"/Type\s*/Page\b", body):
                    ordered.append(num)
    if not ordered:
        ordered = [num for num in sorted(objects)
                   if re.search(rb"/Type\s*/Page\b", objects[num])]
    return ordered


def _content_object_numbers(page_body: bytes) -> list[int]:
    match = re.search(rb"/Contents\s*(\[[^\]]*\]|\d+\s+\d+\s+R)", page_body)
    if match is None:
        return []
    return [int(m.group(1)) for m in _REF_RE.finditer(match.group(1))]


def _filters(header: bytes) -> list[bytes]:
    match = re.search(rb"/Filter\s*(\[[^\]]*\]|/\w+)", header)
    if match is None:
        return []
    return re.findall(rb"/(\w+)", match.group(1))


def _stream_bytes(body: bytes) -> bytes | None:
    start = body.find(b"stream")
    if start == -1:
        return None
    header = body[:start]
    start += len(b"stream")
    if body[start:start + 2] == b"\r\n":
        start += 2
    elif body[start:start + 1] in (b"\n", b"\r"):
        start += 1
    end = body.find(b"endstream", start)
    if end == -1:
        return None
    raw = body[start:end]
    for name in _filters(header):
        try:
            if name == b"FlateDecode":
                raw = zlib.decompress(raw)
            elif name == b"ASCII85Decode":
                text = raw.strip()
                if text.startswith(b"<~"):
                    text = text[2:]
                if text.endswith(b"~>"):
                    text = text[:-2]
                raw = base64.a85decode(text)
            elif name == b"ASCIIHexDecode":
                digits = re.sub(rb"[\s>]", b"", raw)
                if len(digits) % 2:
                    digits += b"0"
                raw = bytes.fromhex(digits.decode("ascii"))
            else:
                return None  # unsupported filter (DCT, LZW, ...)
        except (ValueError, zlib.error):
            return None
    return raw


def _decode_literal(raw: bytes) -> str:
    out = bytearray()
    i = 0
    while i < len(raw):
        ch = raw[i:i + 1]
        if ch == b"\\":
            nxt = raw[i + 1:i + 2]
            if nxt in _ESCAPES:
                out += _ESCAPES[nxt]
                i += 2
            elif nxt.isdigit():
                octal = raw[i + 1:i + 4]
                span = 1
                while span < 3 and span < len(octal) and octal[:span + 1].isdigit():
                    span += 1
                out.append(int(octal[:span], 8) & 0xFF)
                i += 1 + span
            elif nxt in (b"\n", b"\r"):
                i += 2
            else:
                out += nxt
                i += 2
        else:
            out += ch
            i += 1
    return out.decode("latin-1")


def _block_text(block: bytes) -> str:
    """Strings shown inside one BT..ET block; positioning ops become newlines."""
    parts: list[str] = []
    i = 0
    n = len(block)
    while i < n:
        ch = block[i:i + 1]
        if ch == b"(":
            depth = 1
            j = i + 1
            while j < n and depth:
                cj = block[j:j + 1]
                if cj == b"\\":
                    j += 2
                    continue
                if cj == b"(":
                    depth += 1
                elif cj == b")":
                    depth -= 1
                j += 1
            parts.append(_decode_literal(block[i + 1:j - 1]))
            i = j
        elif ch == b"<" and block[i + 1:i + 2] != b"<":
            j = block.find(b">", i)
            if j == -1:
                break
            digits = re.sub(rb"\s", b"", block[i + 1:j])
            if len(digits) % 2:
                digits += b"0"
            try:
                parts.append(bytes.fromhex(digits.decode("ascii")).decode("latin-1"))
            except ValueError:
                pass
            i = j + 1
        elif block[i:i + 2] in (b"Td", b"TD") or block[i:i + 2] == b"T*" or ch in (b"'", b'"'):
            if parts and parts[-1] != "\n":
                parts.append("\n")
            i += 2 if ch == b"T" else 1
        else:
            i += 1
    text = "".join(parts)
    return text.strip("\n")


def _content_text(content: bytes) -> str:
    blocks = re.findall(rb"BT\b(.*?)\bET\b", content, re.DOTALL)
    lines = [_block_text(b) for b in blocks]
    return "\n".join(line for line in lines if line)


def extract_pages(data: bytes) -> list[str]:
    """One text string per page, in page order. Raises PdfUnreadable."""
    if not data.startswith(b"%PDF"):
        raise PdfUnreadable("missing %PDF header")
    if re.search(rb"/Encrypt\s+\d+\s+\d+\s+R", data):
        raise PdfUnreadable("encrypted document")
    objects = _objects(data)
    pages = _page_numbers(objects)
    if not pages:
        raise PdfUnreadable("no page objects found")

    texts: list[str] = []
    for page_num in pages:
        chunks: list[str] = []
        for content_num in _content_object_numbers(objects[page_num]):
            body = objects.get(content_num)
            if body is None:
                continue
            stream = _stream_bytes(body)
            if stream is not None:
                chunks.append(_content_text(stream))
        texts.append("\n".join(c for c in chunks if c))
    return texts
