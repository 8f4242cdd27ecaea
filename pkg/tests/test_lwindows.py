import pytest
from hypothesis import given, strategies as st

from lenlog import CodecError, ErrorKind, LengthWindows, entry_at


def line(n, fill=b"x"):
    return fill * n


def test_lookup_empty():
    assert LengthWindows(8).lookup(70) is None


def test_lookup_single():
    w = LengthWindows(8)
    w.cache(line(70))
    assert w.lookup(70) == (line(70),)


def test_lookup_keeps_order():
    w = LengthWindows(8)
    a, b, c = line(70, b"a"), line(60, b"b"), line(70, b"c")
    for x in (a, b, c):
        w.cache(x)
    assert w.lookup(70) == (a, c)
    assert w.lookup(60) == (b,)


def test_fifo_eviction():
    w = LengthWindows(2)
    for x in (b"AAA", b"BBB", b"CCC"):
        w.cache(x)
    assert w.lookup(3) == (b"BBB", b"CCC")


def test_one_queue_per_length():
    w = LengthWindows(8)
    for n in range(1, 9):
        w.cache(line(n))
    assert len(w) == 8
    assert sorted(w.lengths()) == list(range(1, 9))
    assert all(len(w.lookup(n)) == 1 for n in range(1, 9))


def test_capacity_one():
    w = LengthWindows(1)
    w.cache(b"A1")
    w.cache(b"A2")
    assert w.lookup(2) == (b"A2",)


def test_empty_line_cached():
    w = LengthWindows(4)
    w.cache(b"")
    assert w.lookup(0) == (b"",)


def test_entry_at():
    q = (b"A", b"B", b"C")
    assert entry_at(q, 0) == b"C"
    assert entry_at(q, 2) == b"A"
    with pytest.raises(CodecError) as err:
        entry_at((b"A",), 1)
    assert err.value.kind is ErrorKind.CORRUPT_RECORD


def test_equality():
    a, b = LengthWindows(3), LengthWindows(3)
    for x in (b"ab", b"cd", b"xyz"):
        a.cache(x)
        b.cache(x)
    assert a == b
    b.cache(b"ef")
    assert a != b
    assert a != LengthWindows(4)


def test_nbytes_bounded():
    w = LengthWindows(4)
    for i in range(100):
        w.cache(bytes([65 + i % 26]) * 10)
    # one queue of k lines of 10 bytes, however many were cached
    assert w.nbytes < 2 * 4 * 10 + 64


@given(st.integers(1, 12), st.lists(st.binary(max_size=6).map(lambda b: b.replace(b"\x00", b"z").replace(b"\n", b"z")), max_size=60))
def test_matches_naive_fifo(k, lines):
    w = LengthWindows(k)
    naive = {}
    for x in lines:
        w.cache(x)
        q = naive.setdefault(len(x), [])
        q.append(x)
        del q[:-k]
    assert w.snapshot() == {n: tuple(q) for n, q in naive.items()}
