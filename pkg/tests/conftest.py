import io

import numpy as np
import pytest

from hfmoments.ticks import CleanConfig, GridPath, TickSeries, parse_ticks


@pytest.fixture
def session() -> CleanConfig:
    return CleanConfig()


def make_ticks(lines: list[str], symbol: str = "TEST", date: str = "2020-01-02") -> TickSeries:
    return parse_ticks(io.StringIO("\n".join(lines) + "\n"), symbol, date)


def grid_from_increments(increments, delta: float = 300.0, date: str = "2020-01-02") -> GridPath:
    log_prices = np.concatenate([[0.0], np.cumsum(increments)])
    return GridPath(date=date, delta=delta, log_prices=log_prices)
