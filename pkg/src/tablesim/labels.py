"""Semantic label taxonomy.

Two label spaces share one integer range: background/furniture classes sit
in a reserved low band (0 = unlabeled background, 1..20 = furniture), and
the 52 tabletop object classes start at ``TABLETOP_OFFSET``.
"""

from __future__ import annotations

import numpy as np

BACKGROUND_ID = 0
TABLETOP_OFFSET = 100

FURNITURE_CLASSES = (
    "wall", "floor", "cabinet", "bed", "chair", "sofa", "table", "door",
    "window", "bookshelf", "picture", "counter", "desk", "curtain",
    "refrigerator", "shower curtain", "toilet", "sink", "bathtub",
    "other furniture",
)

TABLETOP_CLASSES = (
    "bag", "bottle", "bowl", "camera", "can", "cap", "clock", "keyboard",
    "display", "earphone", "jar", "knife", "lamp", "laptop", "microphone",
    "microwave", "mug", "printer", "remote control", "phone", "alarm",
    "book", "cake", "calculator", "candle", "charger", "chessboard",
    "coffee machine", "comb", "cutting board", "dishes", "doll", "eraser",
    "eye glasses", "file box", "fork", "fruit", "globe", "hat", "mirror",
    "notebook", "pencil", "plant", "plate", "radio", "ruler", "saucepan",
    "spoon", "tea pot", "toaster", "vase", "vegetables",
)

FURNITURE_IDS = {name: i + 1 for i, name in enumerate(FURNITURE_CLASSES)}
TABLETOP_IDS = {name: TABLETOP_OFFSET + i for i, name in enumerate(TABLETOP_CLASSES)}

_ALL_IDS = {**FURNITURE_IDS, **TABLETOP_IDS, "background": BACKGROUND_ID}
_ALL_NAMES = {v: k for k, v in _ALL_IDS.items()}


def semantic_id(name: str) -> int:
    """Integer id for a class name (furniture, tabletop, or 'background')."""
    return _ALL_IDS[name]


def class_name(sid: int) -> str:
    return _ALL_NAMES.get(int(sid), f"class_{int(sid)}")


def is_tabletop_id(sid):
    """True where a semantic id (scalar or array) is a tabletop class."""
    return np.asarray(sid) >= TABLETOP_OFFSET


# Which object classes belong on which table type. The shipped map groups
# the 52 classes by commonsense table function; override it per catalog via
# the manifest's "compatibility" section.
DEFAULT_COMPATIBILITY: dict[str, tuple[str, ...]] = {
    "dining_table": (
        "bottle", "bowl", "can", "mug", "plate", "dishes", "fork", "knife",
        "spoon", "tea pot", "jar", "cake", "fruit", "vegetables", "candle",
        "saucepan", "cutting board",
    ),
    "coffee_table": (
        "mug", "tea pot", "bowl", "can", "bottle", "book", "remote control",
        "phone", "alarm", "fruit", "plant", "vase", "eye glasses", "cake",
        "chessboard", "doll", "radio", "earphone", "hat", "cap", "bag",
    ),
    "desk": (
        "pencil", "eraser", "ruler", "notebook", "book", "calculator",
        "laptop", "keyboard", "display", "lamp", "phone", "charger",
        "eye glasses", "file box", "alarm", "camera", "printer",
        "microphone", "radio", "globe", "clock", "earphone", "mug", "doll",
    ),
    "kitchen_counter": (
        "microwave", "toaster", "coffee machine", "saucepan",
        "cutting board", "dishes", "plate", "bowl", "knife", "fork",
        "spoon", "can", "jar", "bottle", "fruit", "vegetables", "cake",
        "tea pot", "mug",
    ),
    "bathroom_vanity": (
        "comb", "mirror", "bottle", "jar", "candle", "cap",
    ),
}

TABLE_CATEGORIES = tuple(DEFAULT_COMPATIBILITY)
