"""
Utility functions for operator file hashing, argument parsing and worker maps
"""
import hashlib
import concurrent.futures
from pathlib import Path
from typing import Callable, List, Optional, Sequence, TypeVar, Union

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# Rows per chunk in batched scans; fixed so results do not depend on worker count
CHUNK_SIZE = 1024


def get_operator_hash(source: Union[str, bytes, Path]) -> str:
    """
    SHA256 of an operator file's bytes, used as its identity in reports

    Args:
        source: File path, or the raw text/bytes of the file

    Returns:
        Hex digest

    Raises:
        ValueError: If the content is empty
    """
    if isinstance(source, Path):
        data = source.read_bytes()
    elif isinstance(source, str):
        data = source.encode("utf-8")
    else:
        data = source

    if not data or not data.strip():
        raise ValueError("Operator content cannot be empty")

    return hashlib.sha256(data).hexdigest()


def parse_vector(text: str) -> np.ndarray:
    """
    Parse "f1,f2,f3" into a real 3-vector

    Raises:
        ValueError: If there are not exactly three numeric components
    """
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3 or not all(parts):
        raise ValueError(f"Expected three comma-separated numbers, got '{text}'")
    return np.array([float(p) for p in parts])


def parse_range(text: str, grid: Optional[int] = None) -> np.ndarray:
    """
    Parse a parameter range for grid sweeps

    Accepted forms:
        "v"             a single value
        "lo:hi:step"    lo, lo+step, ... up to hi inclusive
        "lo:hi"         `grid` evenly spaced points (needs grid >= 1)

    Args:
        text: Range expression
        grid: Point count for the two-part form

    Returns:
        1-D array of values (never empty)

    Raises:
        ValueError: If the expression is malformed or yields no points
    """
    parts = [p.strip() for p in text.split(":")]
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"Invalid range '{text}'")

    if len(numbers) == 1:
        return np.array(numbers)

    if len(numbers) == 2:
        if grid is None or grid < 1:
            raise ValueError(f"Range '{text}' needs --grid with at least one point")
        lo, hi = numbers
        return np.linspace(lo, hi, grid) if grid > 1 else np.array([lo])

    if len(numbers) == 3:
        lo, hi, step = numbers
        if step <= 0:
            raise ValueError(f"Range step must be positive in '{text}'")
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        if count < 1:
            raise ValueError(f"Range '{text}' is empty")
        return lo + step * np.arange(count)

    raise ValueError(f"Invalid range '{text}'")


def map_ordered(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply func to every item, optionally on a thread pool, keeping input order
    """
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def map_chunks(
    func: Callable[..., np.ndarray],
    arrays: Sequence[np.ndarray],
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> np.ndarray:
    """
    Evaluate a row-wise batched function over fixed-size chunks

    Args:
        func: Called as func(*chunk_arrays), returns one row per input row
        arrays: Arrays sharing the same leading length
        workers: Thread count
        chunk_size: Rows per chunk

    Returns:
        Concatenated results in input order
    """
    n = len(arrays[0])
    bounds = [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]
    results = map_ordered(lambda b: func(*(a[b[0]:b[1]] for a in arrays)), bounds, workers)
    return np.concatenate(results, axis=0)
