"""
Ordered parallel map over independent numerical tasks
"""
import os
from concurrent.futures import ThreadPoolExecutor

from config.settings import Config


def worker_count(threads=None):
    """Resolve a thread count; 0 or None means all cores"""
    threads = Config.THREADS if threads is None else threads
    return threads if threads and threads > 0 else (os.cpu_count() or 1)


def ordered_map(fn, items, threads=None):
    """Map fn over items, results in input order"""
    items = list(items)
    workers = min(worker_count(threads), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
