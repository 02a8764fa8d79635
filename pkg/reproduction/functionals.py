"""
Functional catalog for the many-to-one identity

Each entry g depends on a path only through its terminal value s_n and its
running minimum (S_0 = 0 included). The tree side sums g over generation-n
particles; the walk side averages e^{s_n} g(s) over the associated walk.
The catalog is closed: every entry keeps e^{s_n} g bounded on the walk
side, which unrestricted g would not.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from core.errors import ConfigError

PathFn = Callable[[np.ndarray, np.ndarray, float, float], np.ndarray]


@dataclass(frozen=True)
class CatalogFunctional:
    """
    Attributes:
        name: Catalog id
        description: Human readable formula
        log_tree_value: log g(terminal, path_min; a, b), -inf where g = 0
    """
    name: str
    description: str
    log_tree_value: PathFn

    def tree_value(self, terminal, path_min, a: float = 1.0, b: float = 0.0) -> np.ndarray:
        return np.exp(self.log_tree_value(np.asarray(terminal, float), np.asarray(path_min, float), a, b))

    def walk_value(self, terminal, path_min, a: float = 1.0, b: float = 0.0) -> np.ndarray:
        """e^{s_n} g on the walk side"""
        terminal = np.asarray(terminal, float)
        return np.exp(terminal + self.log_tree_value(terminal, np.asarray(path_min, float), a, b))


def _log_indicator(mask: np.ndarray) -> np.ndarray:
    return np.where(mask, 0.0, -np.inf)


CATALOG: Dict[str, CatalogFunctional] = {
    f.name: f for f in [
        CatalogFunctional("unit_weight", "e^{-s_n}",
                          lambda s, m, a, b: -s),
        CatalogFunctional("stay_above_weight", "1{min >= -a} e^{-s_n}",
                          lambda s, m, a, b: _log_indicator(m >= -a) - s),
        CatalogFunctional("leaf_nonpositive", "1{s_n <= 0}",
                          lambda s, m, a, b: _log_indicator(s <= 0.0)),
        CatalogFunctional("terminal_window", "1{min >= -a, s_n <= b}",
                          lambda s, m, a, b: _log_indicator((m >= -a) & (s <= b))),
        CatalogFunctional("terminal_decay", "e^{-2 s_n}",
                          lambda s, m, a, b: -2.0 * s),
    ]
}


def get_functional(name: str) -> CatalogFunctional:
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigError(f"functional '{name}' is not in the catalog ({', '.join(CATALOG)})")


def catalog_names() -> List[str]:
    return list(CATALOG)
