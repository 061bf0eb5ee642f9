"""Report rows and the column layout of emitted risk tables."""
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

CSV_COLUMNS = ("n", "trials", "loss_name", "risk", "stderr", "n_risk", "ks_stat", "oob_rate")
FLOAT_COLUMNS = ("risk", "stderr", "n_risk", "ks_stat", "oob_rate")


@dataclass
class RiskRow:
    """Risk statistics at one sample size"""
    n: int
    trials: int
    loss_name: str
    risk: float
    stderr: float
    n_risk: float
    ks_stat: float
    oob_rate: float
    covariance: list = field(default_factory=list)
    limit_covariance: Optional[list] = None
    extras: dict = field(default_factory=dict)

    def csv_values(self):
        return [getattr(self, column) for column in CSV_COLUMNS]

    @classmethod
    def from_dict(cls, content):
        """null statistics read back from JSON become NaN"""
        values = dict(content)
        for column in FLOAT_COLUMNS:
            value = values.get(column)
            values[column] = math.nan if value is None else float(value)
        return cls(**values)


@dataclass
class ScalingFit:
    """log(risk) = intercept + slope log(n)"""
    slope: float
    intercept: float
    slope_low: float
    slope_high: float
    confidence: float = 0.95


@dataclass
class RiskReport:
    config: dict
    rows: list = field(default_factory=list)
    scaling: Optional[ScalingFit] = None

    def as_dict(self):
        return {
            "config": self.config,
            "rows": [asdict(row) for row in self.rows],
            "scaling": None if self.scaling is None else asdict(self.scaling),
        }

    @classmethod
    def from_dict(cls, content):
        scaling = content.get("scaling")
        return cls(config=content.get("config", {}),
                   rows=[RiskRow.from_dict(row) for row in content.get("rows", [])],
                   scaling=None if scaling is None else ScalingFit(**scaling))
