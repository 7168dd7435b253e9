"""Convert weekly retail sales into benchmark instances.

Input schema (CSV):
  sales:    article_id, week_start (ISO date), units, avg_price
  metadata: article_id, prod_name, product_type_name, colour_group_name,
            garment_group_name, detail_desc

Pipeline: per article, 52 ordered weeks; keep articles with positive sales in
at least 50 of 52 weeks and a max/min weekly average price ratio of at most
1.2 after greedily excluding up to 4 outlier weeks; rank survivors by total
annual volume and keep the top 200.  The first 5 weeks seed the demand
history and the remaining 47 weeks form the test trajectory.  Critical
fractiles are assigned evenly across articles with a fixed seed and each
article is crossed with the three lead-time regimes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import pandas as pd

from .benchmark import COST_CONFIGS, LEAD_CONFIGS
from .sim import Instance

WEEKS = 52
HISTORY_WEEKS = 5
TEST_WEEKS = WEEKS - HISTORY_WEEKS
MIN_POSITIVE_WEEKS = 50
MAX_PRICE_RATIO = 1.2
MAX_PRICE_OUTLIERS = 4
TOP_ARTICLES = 200

SALES_COLUMNS = ("article_id", "week_start", "units", "avg_price")
META_COLUMNS = ("article_id", "prod_name", "product_type_name",
                "colour_group_name", "garment_group_name", "detail_desc")


class RealDataSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class RealArticleSeries:
    article_id: str
    weekly_sales: tuple[int, ...]
    week_starts: tuple[str, ...]
    name: str = ""
    product_type: str = ""
    color: str = ""
    garment_group: str = ""
    detail: str = ""

    @property
    def total_volume(self) -> int:
        return sum(self.weekly_sales)

    @property
    def description(self) -> str:
        parts = [p for p in (self.name, self.product_type, self.color,
                             self.garment_group) if p]
        head = ", ".join(parts)
        return f"{head}. {self.detail}".strip() if self.detail else head


def _require_columns(df: pd.DataFrame, columns: Sequence[str], label: str) -> None:
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise RealDataSchemaError(f"{label} table is missing columns: {missing}")


def price_ratio_after_exclusions(prices: Sequence[float],
                                 max_excluded: int = MAX_PRICE_OUTLIERS) -> float:
    """Smallest max/min ratio achievable after dropping up to
    ``max_excluded`` weeks.  Only the sorted extremes matter, so the optimum
    is an exhaustive scan over (low drops, high drops) splits."""
    values = sorted(float(p) for p in prices if np.isfinite(p) and p > 0)
    n = len(values)
    if n == 0:
        return float("inf")
    best = float("inf")
    for total in range(min(max_excluded, n - 1) + 1):
        for low in range(total + 1):
            window = values[low:n - (total - low)]
            best = min(best, window[-1] / window[0])
    return best


def preprocess_real(weekly_sales: Union[pd.DataFrame, str],
                    articles_meta: Union[pd.DataFrame, str],
                    top: int = TOP_ARTICLES) -> list[RealArticleSeries]:
    """Apply both filters and the volume ranking; returns at most ``top``
    articles (all survivors, with a warning, if fewer)."""
    if not isinstance(weekly_sales, pd.DataFrame):
        weekly_sales = pd.read_csv(weekly_sales)
    if not isinstance(articles_meta, pd.DataFrame):
        articles_meta = pd.read_csv(articles_meta)
    _require_columns(weekly_sales, SALES_COLUMNS, "sales")
    _require_columns(articles_meta, META_COLUMNS, "metadata")

    meta_by_id = {str(row.article_id): row
                  for row in articles_meta.itertuples(index=False)}

    survivors: list[RealArticleSeries] = []
    for article_id, group in weekly_sales.groupby("article_id", sort=True):
        group = group.sort_values("week_start")
        if len(group) != WEEKS:
            continue
        units = group["units"].to_numpy()
        if (units > 0).sum() < MIN_POSITIVE_WEEKS:
            continue
        if price_ratio_after_exclusions(group["avg_price"].to_numpy()) > MAX_PRICE_RATIO:
            continue
        meta = meta_by_id.get(str(article_id))
        survivors.append(RealArticleSeries(
            article_id=str(article_id),
            weekly_sales=tuple(int(u) for u in units),
            week_starts=tuple(str(w) for w in group["week_start"]),
            name=str(getattr(meta, "prod_name", "") or ""),
            product_type=str(getattr(meta, "product_type_name", "") or ""),
            color=str(getattr(meta, "colour_group_name", "") or ""),
            garment_group=str(getattr(meta, "garment_group_name", "") or ""),
            detail=str(getattr(meta, "detail_desc", "") or ""),
        ))

    survivors.sort(key=lambda s: (-s.total_volume, s.article_id))
    if len(survivors) < top:
        warnings.warn(
            f"only {len(survivors)} articles survive the filters "
            f"(wanted {top}); returning all survivors")
        return survivors
    return survivors[:top]


def real_instances(series: Sequence[RealArticleSeries],
                   seed: int = 42) -> list[Instance]:
    """Cross each article with the three lead-time regimes; critical
    fractiles are shuffled over articles with the fixed seed so each value
    gets an even share."""
    rng = np.random.default_rng([seed, 7])
    order = rng.permutation(len(series))
    rho_of: dict[int, int] = {}
    for rank, idx in enumerate(order):
        rho_of[int(idx)] = rank % len(COST_CONFIGS)

    instances: list[Instance] = []
    for a_idx, article in enumerate(series):
        cost = COST_CONFIGS[rho_of[a_idx]]
        history = article.weekly_sales[:HISTORY_WEEKS]
        demands = article.weekly_sales[HISTORY_WEEKS:]
        context = tuple(f"Week starting {w}" for w in article.week_starts[HISTORY_WEEKS:])
        for l_idx, lead_cfg in enumerate(LEAD_CONFIGS):
            lead_rng = np.random.default_rng([seed, a_idx, 2000 + l_idx])
            instances.append(Instance(
                id=f"hm-{article.article_id}-{cost.label}-{lead_cfg.label}",
                horizon=len(demands),
                demands=demands,
                history=history,
                lead_times=lead_cfg.draw(len(demands), lead_rng),
                promised_lead=lead_cfg.promised_lead,
                profit=cost.profit,
                holding=cost.holding,
                context=context,
                product_description=article.description,
                provenance={
                    "kind": "real",
                    "article_id": article.article_id,
                    "rho": cost.fractile,
                    "lead": lead_cfg.label,
                    "lead_kind": lead_cfg.kind,
                },
            ))
    return instances
