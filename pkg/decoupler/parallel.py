"""
Ordered parallel map for sweeps and grids.

Results always come back in input order, so reductions over cells are
deterministic regardless of the thread count. numpy and scipy release the
GIL inside their linear algebra kernels, which is where sweep points spend
their time.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    threads: int = 1,
    desc: Optional[str] = None,
    progress: Optional[bool] = None,
) -> List[R]:
    """
    Apply fn to every item and return results in input order.

    Args:
        fn: Function of one item; exceptions propagate to the caller
        items: Work items
        threads: Worker threads; 1 runs inline
        desc: Progress bar label
        progress: Force the progress bar on/off (None: only when attached to a terminal)

    Returns:
        List of results, same order as items
    """
    items = list(items)
    disable = None if progress is None else not progress

    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in tqdm(items, desc=desc, disable=disable, leave=False)]

    logger.debug(f"Running {len(items)} tasks on {threads} threads ({desc or 'sweep'})")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(
            tqdm(pool.map(fn, items), total=len(items), desc=desc, disable=disable, leave=False)
        )
