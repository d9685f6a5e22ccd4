import builtins
from collections.abc import Iterator
import logging
import math
from pathlib import Path
import sys
from types import TracebackType
from typing import Final, cast

from rich.console import Console
from rich.logging import RichHandler

stderr_console: Final = Console(stderr=True)


def check_bool(object: object) -> bool:
    if isinstance(object, bool):
        return object
    raise TypeError(
        f'expected object to be a bool, got {type(object).__name__!r}',
    )


def check_int(object: object) -> int:
    if isinstance(object, int) and not isinstance(object, bool):
        return object
    raise TypeError(
        f'expected object to be an int, got {type(object).__name__!r}',
    )


def check_float(object: object) -> float:
    if isinstance(object, (int, float)) and not isinstance(object, bool):
        value = float(object)
        if math.isfinite(value):
            return value
        raise ValueError(f'expected a finite number, got {value!r}')
    raise TypeError(
        f'expected object to be a float, got {type(object).__name__!r}',
    )


def check_path(object: object) -> Path:
    if isinstance(object, Path):
        return object
    raise TypeError(
        f'expected object to be a Path, got {type(object).__name__!r}',
    )


def check_float_list(object: object) -> list[float]:
    if not isinstance(object, list):
        raise TypeError(
            f'expected object to be a list, got {type(object).__name__!r}',
        )
    items = cast(list[builtins.object], object)
    for i, item in enumerate(items):
        if not isinstance(item, (int, float)) or isinstance(item, bool):
            raise TypeError(
                f'expected object[{i}] to be a float, '
                f'got {type(item).__name__!r}',
            )
    return [float(item) for item in cast(list[float], items)]


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f'expected a positive integer, got {value}')
    return value


def pairs[T](items: list[T]) -> Iterator[tuple[int, int]]:
    """Ordered index pairs (i, j) with i != j."""
    for i in range(len(items)):
        for j in range(len(items)):
            if i != j:
                yield i, j


def suppress_unhandled(*exceptions: type[BaseException]) -> None:
    prev_excepthook = sys.excepthook

    def excepthook(
        type: type[BaseException],
        value: BaseException,
        traceback: TracebackType | None,
    ) -> None:
        if not isinstance(value, exceptions):
            prev_excepthook(type, value, traceback)

    sys.excepthook = excepthook


def configure_logging(verbosity: int) -> None:
    match verbosity:
        case 0:
            level = logging.WARNING
        case 1:
            level = logging.INFO
        case _:
            level = logging.DEBUG

    logging.basicConfig(
        level=level,
        format='%(message)s',
        datefmt='[%X]',
        handlers=[RichHandler(console=stderr_console, show_path=False)],
        force=True,
    )
