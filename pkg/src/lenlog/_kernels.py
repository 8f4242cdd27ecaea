"""Compiled inner loops for the streaming engine.

Window state lives in four numba containers shared with
:class:`lenlog.lwindows.LengthWindows`:

``slots``   typed Dict, line length -> slot index
``rings``   typed List of uint8 arrays, slot -> ring of ``k * length`` bytes
``heads``   typed List, slot -> ring position of the next insertion
``counts``  typed List, slot -> number of cached lines (<= k)

Bit-stream output keeps its partial byte in ``(acc, nacc)`` across calls so
that line-at-a-time and whole-file compression emit identical bytes.
"""

import numpy as np
from numba import njit, types
from numba.typed import Dict, List

# decode status codes
OK = 0
NEED_INPUT = 1
OUTPUT_FULL = 2
ERR_NO_REFERENCE = -1
ERR_RUN_ZERO = -2
ERR_LITERAL = -3
ERR_PADDING = -4
ERR_EMPTY_RECORD = -5
ERR_RAW_CONTENT = -6
ERR_VARINT = -7
ERR_INSTRUCTION_LEN = -8

MAX_LINE = 2**32 - 1


def new_state():
    slots = Dict.empty(key_type=types.int64, value_type=types.int64)
    rings = List.empty_list(types.uint8[::1])
    heads = List.empty_list(types.int64)
    counts = List.empty_list(types.int64)
    return slots, rings, heads, counts


@njit(cache=True)
def _find(slots, length):
    if length in slots:
        return slots[length]
    return -1


@njit(cache=True)
def _slot(slots, rings, heads, counts, k, length):
    s = _find(slots, length)
    if s < 0:
        s = len(rings)
        slots[length] = s
        rings.append(np.zeros(k * length, np.uint8))
        heads.append(0)
        counts.append(0)
    return s


@njit(cache=True)
def _push(rings, heads, counts, k, s, src, start, length):
    h = heads[s]
    ring = rings[s]
    base = h * length
    for j in range(length):
        ring[base + j] = src[start + j]
    heads[s] = (h + 1) % k
    if counts[s] < k:
        counts[s] += 1


@njit(cache=True)
def cache_line(slots, rings, heads, counts, k, line):
    s = _slot(slots, rings, heads, counts, k, line.shape[0])
    _push(rings, heads, counts, k, s, line, 0, line.shape[0])


@njit(cache=True)
def ring_bytes(rings):
    total = 0
    for r in rings:
        total += r.shape[0]
    return total


@njit(cache=True)
def _varint_len(v):
    n = 1
    while v >= 0x80:
        v >>= 7
        n += 1
    return n


@njit(cache=True)
def _put_varint(out, pos, v):
    while v >= 0x80:
        out[pos] = (v & 0x7F) | 0x80
        v >>= 7
        pos += 1
    out[pos] = v
    return pos + 1


@njit(cache=True)
def _put_bits(out, pos, acc, nacc, value, nbits):
    # bytes leave the accumulator four at a time; _drain_bits empties it
    acc = (acc << nbits) | value
    nacc += nbits
    if nacc >= 32:
        nacc -= 32
        w = acc >> nacc
        out[pos] = (w >> 24) & 0xFF
        out[pos + 1] = (w >> 16) & 0xFF
        out[pos + 2] = (w >> 8) & 0xFF
        out[pos + 3] = w & 0xFF
        pos += 4
        acc &= (1 << nacc) - 1
    return pos, acc, nacc


@njit(cache=True)
def _drain_bits(out, pos, acc, nacc):
    while nacc >= 8:
        nacc -= 8
        out[pos] = (acc >> nacc) & 0xFF
        pos += 1
    acc &= (1 << nacc) - 1
    return pos, acc, nacc


@njit(cache=True)
def compress_lines(data, starts, ends, k, wbits, theta, bit_variant,
                   slots, rings, heads, counts, out, opos, acc, nacc, stats):
    """Encode lines ``data[starts[i]:ends[i]]`` into ``out`` starting at ``opos``.

    ``stats`` accumulates [lines, rle records, similarity probes].
    Returns the new ``(opos, acc, nacc)``.
    """
    for i in range(starts.shape[0]):
        st = starts[i]
        n = ends[i] - st
        s = _find(slots, n)
        wid = -1
        m = 0
        if n > 0 and s >= 0 and counts[s] > 0:
            ring = rings[s]
            h = heads[s]
            best_eq = -1
            for w in range(counts[s]):
                base = ((h - 1 - w + k) % k) * n
                eq = 0
                for j in range(n):
                    if ring[base + j] == data[st + j]:
                        eq += 1
                stats[2] += 1
                if eq / n >= theta:
                    wid = w
                    break
                if eq > best_eq:
                    best_eq = eq
                    wid = w
            base = ((h - 1 - wid + k) % k) * n
            run = 0
            for j in range(n):
                if ring[base + j] == data[st + j]:
                    run += 1
                else:
                    if run > 0:
                        m += (run + 254) // 255
                        run = 0
                    m += 1
            if run > 0:
                m += (run + 254) // 255
            if bit_variant:
                if 1 + wbits + 9 * (m + 1) >= 1 + 8 * (_varint_len(n) + n):
                    wid = -1
            else:
                q = (m + 7) // 8
                hbytes = (4 + wbits + 7) // 8
                if hbytes + _varint_len(q) + q + m >= 1 + _varint_len(n) + n:
                    wid = -1

        if wid < 0:
            if bit_variant:
                opos, acc, nacc = _put_bits(out, opos, acc, nacc, 0, 1)
                v = n
                while v >= 0x80:
                    opos, acc, nacc = _put_bits(out, opos, acc, nacc, (v & 0x7F) | 0x80, 8)
                    v >>= 7
                opos, acc, nacc = _put_bits(out, opos, acc, nacc, v, 8)
                opos, acc, nacc = _drain_bits(out, opos, acc, nacc)
                if nacc == 0:
                    for j in range(n):
                        out[opos + j] = data[st + j]
                    opos += n
                else:
                    for j in range(n):
                        opos, acc, nacc = _put_bits(out, opos, acc, nacc, np.int64(data[st + j]), 8)
            else:
                out[opos] = 0
                opos = _put_varint(out, opos + 1, n)
                for j in range(n):
                    out[opos + j] = data[st + j]
                opos += n
        else:
            stats[1] += 1
            ring = rings[s]
            base = ((heads[s] - 1 - wid + k) % k) * n
            if bit_variant:
                opos, acc, nacc = _put_bits(out, opos, acc, nacc, 1, 1)
                opos, acc, nacc = _put_bits(out, opos, acc, nacc, wid, wbits)
                run = 0
                for j in range(n):
                    c = np.int64(data[st + j])
                    if ring[base + j] == c:
                        run += 1
                    else:
                        while run > 0:
                            chunk = min(run, 255)
                            opos, acc, nacc = _put_bits(out, opos, acc, nacc, chunk, 9)
                            run -= chunk
                        opos, acc, nacc = _put_bits(out, opos, acc, nacc, 0x100 | c, 9)
                while run > 0:
                    chunk = min(run, 255)
                    opos, acc, nacc = _put_bits(out, opos, acc, nacc, chunk, 9)
                    run -= chunk
                opos, acc, nacc = _put_bits(out, opos, acc, nacc, 0, 9)
            else:
                nb = 4 + wbits
                hbytes = (nb + 7) // 8
                hv = ((1 << (3 + wbits)) | (wid << 3) | (m & 7)) << (hbytes * 8 - nb)
                for b in range(hbytes):
                    out[opos + b] = (hv >> (8 * (hbytes - 1 - b))) & 0xFF
                opos += hbytes
                q = (m + 7) // 8
                opos = _put_varint(out, opos, q)
                ipos = opos
                dpos = opos + q
                for b in range(q):
                    out[ipos + b] = 0
                t = 0
                run = 0
                for j in range(n):
                    c = data[st + j]
                    if ring[base + j] == c:
                        run += 1
                    else:
                        while run > 0:
                            chunk = min(run, 255)
                            out[dpos + t] = chunk
                            t += 1
                            run -= chunk
                        out[ipos + (t >> 3)] |= 0x80 >> (t & 7)
                        out[dpos + t] = c
                        t += 1
                while run > 0:
                    chunk = min(run, 255)
                    out[dpos + t] = chunk
                    t += 1
                    run -= chunk
                opos = dpos + t

        if s < 0:
            s = _slot(slots, rings, heads, counts, k, n)
        _push(rings, heads, counts, k, s, data, st, n)
        stats[0] += 1
    return _drain_bits(out, opos, acc, nacc)


@njit(cache=True)
def _get_bits(buf, p, nbits):
    b = p >> 3
    w = np.int64(buf[b]) << 16
    if b + 1 < buf.shape[0]:
        w |= np.int64(buf[b + 1]) << 8
    if b + 2 < buf.shape[0]:
        w |= np.int64(buf[b + 2])
    return (w >> (24 - (p & 7) - nbits)) & ((1 << nbits) - 1)


@njit(cache=True)
def _read_varint_bytes(buf, pos, end):
    """Returns (value, new_pos, status) reading byte-aligned LEB128."""
    v = 0
    shift = 0
    while True:
        if pos >= end:
            return 0, pos, NEED_INPUT
        b = np.int64(buf[pos])
        pos += 1
        v |= (b & 0x7F) << shift
        if b < 0x80:
            break
        shift += 7
        if shift > 28:
            return 0, pos, ERR_VARINT
    if v > MAX_LINE:
        return 0, pos, ERR_VARINT
    return v, pos, OK


@njit(cache=True)
def _read_varint_bits(buf, p, end):
    v = 0
    shift = 0
    while True:
        if p + 8 > end:
            return 0, p, NEED_INPUT
        b = _get_bits(buf, p, 8)
        p += 8
        v |= (b & 0x7F) << shift
        if b < 0x80:
            break
        shift += 7
        if shift > 28:
            return 0, p, ERR_VARINT
    if v > MAX_LINE:
        return 0, p, ERR_VARINT
    return v, p, OK


@njit(cache=True)
def _emit(out, opos, src, start, n):
    for j in range(n):
        out[opos + j] = src[start + j]
    out[opos + n] = 10
    return opos + n + 1


@njit(cache=True)
def decompress_bytes(buf, pos, end, max_records, k, wbits,
                     slots, rings, heads, counts, out, opos):
    """Decode byte-variant records from ``buf[pos:end]``.

    Each decoded line is written to ``out`` followed by LF.  Returns
    ``(status, pos, opos, records)``; on an error ``pos`` is the offset of
    the failing record.  Incomplete trailing records are left unconsumed.
    """
    nrec = 0
    while nrec < max_records:
        rec = pos
        if pos >= end:
            return NEED_INPUT, rec, opos, nrec
        b0 = np.int64(buf[pos])
        if b0 & 0x80 == 0:
            if b0 != 0:
                return ERR_PADDING, rec, opos, nrec
            n, pos, st = _read_varint_bytes(buf, pos + 1, end)
            if st != OK:
                return st, rec, opos, nrec
            if pos + n > end:
                return NEED_INPUT, rec, opos, nrec
            if opos + n + 1 > out.shape[0]:
                return OUTPUT_FULL, rec, opos, nrec
            for j in range(n):
                c = buf[pos + j]
                if c == 0 or c == 10:
                    return ERR_RAW_CONTENT, rec, opos, nrec
            line_start = opos
            opos = _emit(out, opos, buf, pos, n)
            pos += n
        else:
            nb = 4 + wbits
            hbytes = (nb + 7) // 8
            if pos + hbytes > end:
                return NEED_INPUT, rec, opos, nrec
            hv = 0
            for b in range(hbytes):
                hv = (hv << 8) | np.int64(buf[pos + b])
            padbits = hbytes * 8 - nb
            if hv & ((1 << padbits) - 1) != 0:
                return ERR_PADDING, rec, opos, nrec
            hv >>= padbits
            wid = (hv >> 3) & ((1 << wbits) - 1)
            llb = hv & 7
            if llb == 0:
                llb = 8
            q, pos, st = _read_varint_bytes(buf, pos + hbytes, end)
            if st != OK:
                return st, rec, opos, nrec
            if q == 0:
                return ERR_INSTRUCTION_LEN, rec, opos, nrec
            m = 8 * (q - 1) + llb
            ipos = pos
            dpos = pos + q
            if dpos + m > end:
                return NEED_INPUT, rec, opos, nrec
            if np.int64(buf[dpos - 1]) & ((1 << (8 - llb)) - 1) != 0:
                return ERR_PADDING, rec, opos, nrec
            n = 0
            for t in range(m):
                v = buf[dpos + t]
                if (buf[ipos + (t >> 3)] >> (7 - (t & 7))) & 1:
                    if v == 0 or v == 10:
                        return ERR_LITERAL, rec, opos, nrec
                    n += 1
                else:
                    if v == 0:
                        return ERR_RUN_ZERO, rec, opos, nrec
                    n += v
            s = _find(slots, n)
            if s < 0 or wid >= counts[s]:
                return ERR_NO_REFERENCE, rec, opos, nrec
            if opos + n + 1 > out.shape[0]:
                return OUTPUT_FULL, rec, opos, nrec
            ring = rings[s]
            base = ((heads[s] - 1 - wid + k) % k) * n
            line_start = opos
            o = 0
            for t in range(m):
                v = buf[dpos + t]
                if (buf[ipos + (t >> 3)] >> (7 - (t & 7))) & 1:
                    out[opos + o] = v
                    o += 1
                else:
                    for j in range(v):
                        out[opos + o] = ring[base + o]
                        o += 1
            out[opos + n] = 10
            opos += n + 1
            pos = dpos + m
        length = opos - 1 - line_start
        s = _slot(slots, rings, heads, counts, k, length)
        _push(rings, heads, counts, k, s, out, line_start, length)
        nrec += 1
    return OK, pos, opos, nrec


@njit(cache=True)
def decompress_bits(buf, pos, end, max_records, k, wbits,
                    slots, rings, heads, counts, out, opos):
    """Bit-variant counterpart of :func:`decompress_bytes`; ``pos``/``end`` count bits."""
    nrec = 0
    while nrec < max_records:
        rec = pos
        if pos + 1 > end:
            return NEED_INPUT, rec, opos, nrec
        is_rle = _get_bits(buf, pos, 1)
        pos += 1
        if is_rle == 0:
            n, pos, st = _read_varint_bits(buf, pos, end)
            if st != OK:
                return st, rec, opos, nrec
            if pos + 8 * n > end:
                return NEED_INPUT, rec, opos, nrec
            if opos + n + 1 > out.shape[0]:
                return OUTPUT_FULL, rec, opos, nrec
            line_start = opos
            if pos & 7 == 0:
                b = pos >> 3
                for j in range(n):
                    c = buf[b + j]
                    if c == 0 or c == 10:
                        return ERR_RAW_CONTENT, rec, line_start, nrec
                    out[opos + j] = c
            else:
                for j in range(n):
                    c = _get_bits(buf, pos + 8 * j, 8)
                    if c == 0 or c == 10:
                        return ERR_RAW_CONTENT, rec, line_start, nrec
                    out[opos + j] = c
            out[opos + n] = 10
            opos += n + 1
            pos += 8 * n
        else:
            if pos + wbits > end:
                return NEED_INPUT, rec, opos, nrec
            wid = _get_bits(buf, pos, wbits)
            pos += wbits
            tok_start = pos
            n = 0
            m = 0
            while True:
                if pos + 9 > end:
                    return NEED_INPUT, rec, opos, nrec
                t = _get_bits(buf, pos, 9)
                pos += 9
                if t == 0:
                    break
                if t & 0x100:
                    v = t & 0xFF
                    if v == 0 or v == 10:
                        return ERR_LITERAL, rec, opos, nrec
                    n += 1
                else:
                    n += t
                m += 1
            if m == 0:
                return ERR_EMPTY_RECORD, rec, opos, nrec
            s = _find(slots, n)
            if s < 0 or wid >= counts[s]:
                return ERR_NO_REFERENCE, rec, opos, nrec
            if opos + n + 1 > out.shape[0]:
                return OUTPUT_FULL, rec, opos, nrec
            ring = rings[s]
            base = ((heads[s] - 1 - wid + k) % k) * n
            line_start = opos
            o = 0
            p = tok_start
            for _ in range(m):
                t = _get_bits(buf, p, 9)
                p += 9
                if t & 0x100:
                    out[opos + o] = t & 0xFF
                    o += 1
                else:
                    for j in range(t):
                        out[opos + o] = ring[base + o]
                        o += 1
            out[opos + n] = 10
            opos += n + 1
        length = opos - 1 - line_start
        s = _slot(slots, rings, heads, counts, k, length)
        _push(rings, heads, counts, k, s, out, line_start, length)
        nrec += 1
    return OK, pos, opos, nrec
