"""Annualized cost coefficients and time-of-use electricity prices.

All capital costs are turned into equal yearly payments with
:func:`amortize`. The default cost book carries the drayage asset list
(trucks, batteries, stations, chargers, lines, substation upgrades) with
their initial investments and lifespans.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Optional

import numpy as np


def amortize(investment: float, lifespan: float, rate: float = 0.10) -> float:
    """Annual payment of an annuity-due that repays ``investment``.

    Payments are made at the start of each of ``lifespan`` years, so the
    usual capital recovery factor is discounted by one period. With a zero
    rate the payment is simply ``investment / lifespan``.

    >>> round(amortize(250_000, 10, 0.10))
    36988
    """
    if lifespan < 1:
        raise ValueError(f"lifespan must be >= 1 year, got {lifespan}")
    if rate < 0:
        raise ValueError(f"interest rate must be >= 0, got {rate}")
    if rate == 0:
        return investment / lifespan
    crf = rate / (1.0 - (1.0 + rate) ** (-lifespan))
    return investment * crf / (1.0 + rate)


@dataclass(frozen=True)
class CostItem:
    investment: float
    lifespan: int
    unit: str
    # annual value as printed in the source table, when it is used instead of the formula
    printed: Optional[float] = None


DEFAULT_ITEMS: Dict[str, CostItem] = {
    "veh": CostItem(250_000.0, 10, "$/vehicle"),
    "btr": CostItem(150.0, 10, "$/kWh"),
    "ctr": CostItem(1_000_000.0, 20, "$/station"),
    "cap": CostItem(200.0, 20, "$/kW", printed=20.0),
    "chg": CostItem(587.0, 10, "$/kW"),
    "lne": CostItem(1_200_000.0, 30, "$/mile"),
    "upg_std": CostItem(4_600_000.0, 25, "$/upgrade"),
    "upg_var": CostItem(200_000.0, 25, "$/MW"),
}


@dataclass(frozen=True)
class CostBook:
    """Initial investments, lifespans and the derived annual coefficients.

    ``use_printed`` selects the printed annual value for rows that carry
    one (the power-equipment row lists $20/kW although the annuity gives
    about $21.36/kW). Set it to False to use the formula everywhere.
    """

    items: Mapping[str, CostItem] = field(default_factory=lambda: dict(DEFAULT_ITEMS))
    interest_rate: float = 0.10
    use_printed: bool = True

    def annual(self, key: str) -> float:
        item = self.items[key]
        if self.use_printed and item.printed is not None:
            return item.printed
        return amortize(item.investment, item.lifespan, self.interest_rate)

    @property
    def c_veh(self) -> float:
        return self.annual("veh")

    @property
    def c_btr(self) -> float:
        return self.annual("btr")

    @property
    def c_ctr(self) -> float:
        return self.annual("ctr")

    @property
    def c_cap(self) -> float:
        return self.annual("cap")

    @property
    def c_chg(self) -> float:
        return self.annual("chg")

    @property
    def c_lne(self) -> float:
        return self.annual("lne")

    @property
    def c_upg_std(self) -> float:
        return self.annual("upg_std")

    @property
    def c_upg_var_per_kw(self) -> float:
        # table row is quoted per MW, model flows are in kW
        return self.annual("upg_var") / 1000.0

    def with_overrides(self, overrides: Mapping) -> "CostBook":
        """Return a copy with ``interest_rate``/``use_printed`` and per-item fields replaced."""
        items = dict(self.items)
        kwargs = {}
        for key, value in overrides.items():
            if key in ("interest_rate", "use_printed"):
                kwargs[key] = value
            elif key in items:
                items[key] = replace(items[key], **value)
            else:
                raise KeyError(f"unknown cost item {key!r}")
        return replace(self, items=items, **kwargs)

    def to_dict(self) -> dict:
        return {
            "interest_rate": self.interest_rate,
            "use_printed": self.use_printed,
            "items": {
                k: {"investment": v.investment, "lifespan": v.lifespan, "unit": v.unit, "printed": v.printed}
                for k, v in self.items.items()
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CostBook":
        items = {k: CostItem(**v) for k, v in data["items"].items()}
        return cls(items=items, interest_rate=data["interest_rate"], use_printed=data["use_printed"])


# (start hour, end hour, $/kWh); everything not listed is off-peak
TOU_PERIODS = (
    (14.0, 16.0, 0.177),
    (16.0, 21.0, 0.232),
    (21.0, 23.0, 0.177),
)
TOU_OFF_PEAK = 0.130


def tou_price_at(hour: float) -> float:
    h = hour % 24.0
    for start, end, price in TOU_PERIODS:
        if start <= h < end:
            return price
    return TOU_OFF_PEAK


def tou_prices(step_count: int, step_hours: float, start_hour: float = 0.0) -> np.ndarray:
    """Time-averaged TOU price of every step of a day that starts at ``start_hour``."""
    breaks = sorted({0.0, 24.0, *(p[0] for p in TOU_PERIODS), *(p[1] for p in TOU_PERIODS)})
    prices = np.empty(step_count)
    for t in range(step_count):
        a = start_hour + t * step_hours
        b = a + step_hours
        # integrate the piecewise-constant tariff over [a, b)
        cuts = [a, b]
        day = np.floor(a / 24.0) * 24.0
        while day < b:
            cuts.extend(day + x for x in breaks if a < day + x < b)
            day += 24.0
        cuts = sorted(set(cuts))
        total = sum((hi - lo) * tou_price_at(lo) for lo, hi in zip(cuts[:-1], cuts[1:]))
        prices[t] = total / step_hours
    return prices
