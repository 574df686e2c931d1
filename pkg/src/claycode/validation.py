"""Input checks shared by the estimator layer and the CLI."""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .bittree import InvalidInput
from .scanner.core import check_image


def check_message(msg) -> str:
    if not isinstance(msg, str):
        raise InvalidInput(f"message must be str, got {type(msg).__name__}")
    if not msg:
        raise InvalidInput("message must be non-empty")
    try:
        msg.encode("utf-8")
    except UnicodeEncodeError as exc:
        raise InvalidInput(f"message is not valid UTF-8: {exc}") from None
    return msg


def check_messages(X) -> list[str]:
    """Accept a single string, an iterable of strings or a 1-column array."""
    if isinstance(X, str):
        return [check_message(X)]
    arr = np.asarray(X, dtype=object)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InvalidInput("expected a 1-D collection of messages")
    return [check_message(m) for m in arr]


def check_images(X) -> list[np.ndarray]:
    """One image (2-D or H x W x 3) or a sequence/stack of them, as uint8 arrays."""
    if isinstance(X, np.ndarray) and (X.ndim == 2 or (X.ndim == 3 and X.shape[2] == 3)):
        X = [X]
    if not isinstance(X, (np.ndarray, list, tuple)) and isinstance(X, Iterable):
        X = list(X)
    out = []
    for img in X:
        a = check_image(img)
        if a.dtype != np.uint8:
            if np.issubdtype(a.dtype, np.floating) and a.size and a.max() <= 1.0:
                a = a * 255.0
            a = np.clip(np.rint(a), 0, 255).astype(np.uint8)
        out.append(a)
    if not out:
        raise InvalidInput("no images given")
    return out


def check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0 <= value <= 1:
        raise InvalidInput(f"{name} must lie in [0, 1]")
    return value
