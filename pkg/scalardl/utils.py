import asyncio
import hashlib
import json
import time
from typing import Callable, List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def run_in_threads(fn: Callable[[T], R], items: Sequence[T], threads: int) -> List[R]:
    """
    Run fn over items on worker threads, at most `threads` at a time.
    Results come back in input order.
    """

    async def run_all():
        sem = asyncio.Semaphore(max(1, threads))

        async def one(item):
            async with sem:
                return await asyncio.to_thread(fn, item)

        return await asyncio.gather(*(one(item) for item in items))

    return list(asyncio.run(run_all()))


def fmt_float(x) -> str:
    """
    17 significant digits: enough to round-trip any float64.
    """
    if x is None:
        return ""
    return f"{float(x):.17g}"


def digest_bytes(*arrays: np.ndarray) -> str:
    h = hashlib.blake2b(digest_size=8)
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=np.float64).tobytes())
    return h.hexdigest()


def config_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class Stopwatch:
    def __init__(self):
        self.st = time.time()

    @property
    def elapsed(self) -> float:
        return time.time() - self.st
