"""Shared fixtures: prime tables, the desk-scale reference zero table (cached on
disk under tests/_cache; first build takes about a minute), and the acceptance
context."""

from __future__ import annotations

from pathlib import Path

import pytest

from pclab import arith, zeros, zeta
from pclab.report import DeskContext

CACHE_DIR = Path(__file__).parent / "_cache"
REF_HEIGHT = 75000.0


@pytest.fixture(scope="session")
def prime_table_2m():
    return arith.sieve_build(2_000_000)


@pytest.fixture(scope="session")
def prime_table_small():
    return arith.sieve_build(200_000)


@pytest.fixture(scope="session")
def ref_zeros():
    """First ~1e5 zero ordinates (T = 75000), built once and cached."""
    CACHE_DIR.mkdir(exist_ok=True)
    cache = CACHE_DIR / f"zeros_{int(REF_HEIGHT)}.pclb"
    if cache.exists():
        table = zeros.load_cache(cache, source="computed", precision=1e-5)
        if table.t_max >= REF_HEIGHT - 1.0:
            return zeros.ZeroTable.from_ordinates(
                table.ordinates, t_max=REF_HEIGHT, source="computed", precision=1e-5)
    table = zeta.compute_zero_table(REF_HEIGHT)
    zeros.write_cache(table, cache)
    return table


@pytest.fixture(scope="session")
def zeros_2k(ref_zeros):
    return ref_zeros.restrict(2000.0)


@pytest.fixture(scope="session")
def zeros_10k(ref_zeros):
    return ref_zeros.restrict(10000.0)


@pytest.fixture(scope="session")
def desk_ctx(ref_zeros, prime_table_2m):
    return DeskContext(zero_table=ref_zeros, prime_table=prime_table_2m)


@pytest.fixture(scope="session")
def singular_table():
    return arith.build_singular_series_table()
