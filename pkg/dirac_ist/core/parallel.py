"""Thread pool helpers.

numpy and LAPACK release the GIL inside the heavy kernels, so a thread pool is enough. Work
is always split into chunks whose size does not depend on the thread count, which keeps every
result bitwise independent of ``threads``.
"""

from typing import Callable, List, Sequence, TypeVar

from joblib import Parallel, delayed

T = TypeVar("T")
R = TypeVar("R")


def chunk_ranges(total: int, chunk: int) -> List[range]:
    """Split ``range(total)`` into consecutive ranges of at most ``chunk`` items."""
    return [range(start, min(start + chunk, total)) for start in range(0, total, chunk)]


def parallel_map(func: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Apply ``func`` to every item, preserving input order.

    Args:
        func: Pure function of one item
        items: Work items
        threads: Worker cap; 1 runs inline

    Returns:
        Results in the order of ``items``
    """
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    return Parallel(n_jobs=min(threads, len(items)), prefer="threads")(delayed(func)(item) for item in items)
