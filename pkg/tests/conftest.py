"""Shared builders for tests."""

import pytest

from nakasim.chain import SimBlock, SimTransaction, coinbase_tx


def make_block(block_id, parent, height, miner="m", found_at=0.0,
               txs=(), size=None, bulk=0, fees=0.0):
    cb = coinbase_tx(block_id, miner, 25.0 + fees, found_at)
    size = size if size is not None else 200 + 400 * (len(txs) + bulk)
    return SimBlock(block_id=block_id, parent_id=parent, height=height,
                    miner_id=miner, txs=(cb, *txs), size_bytes=size,
                    found_at=found_at, bulk_txs=bulk, fees=fees)


def make_tx(tx_id, addr_in="a", addr_out="b", fee=0.0001, censored=False,
            size=400, ref=0):
    return SimTransaction(tx_id=tx_id, inputs=((addr_in, ref),),
                          outputs=((addr_out, 1.0),), fee=fee,
                          censored=censored, size_bytes=size)


@pytest.fixture
def chain_pair():
    """A view preloaded with genesis plus helpers bound to it."""
    from nakasim.chain import ChainView
    return ChainView()
