from __future__ import annotations

import enum
from dataclasses import asdict, dataclass


class Method(str, enum.Enum):
    CEN_HOTELLING = "cen-hotelling"
    DIS_HOTELLING = "dis-hotelling"
    CEN_SIGN = "cen-sign"
    DIS_SIGN = "dis-sign"

    @property
    def is_hotelling(self) -> bool:
        return self in (Method.CEN_HOTELLING, Method.DIS_HOTELLING)

    @property
    def is_distributed(self) -> bool:
        return self in (Method.DIS_HOTELLING, Method.DIS_SIGN)

    @classmethod
    def parse(cls, text: str) -> "Method":
        key = text.strip().lower().replace("_", "-")
        aliases = {
            "cenhotelling": cls.CEN_HOTELLING,
            "dishotelling": cls.DIS_HOTELLING,
            "censign": cls.CEN_SIGN,
            "dissign": cls.DIS_SIGN,
        }
        try:
            return cls(key)
        except ValueError:
            if key.replace("-", "") in aliases:
                return aliases[key.replace("-", "")]
            raise


@dataclass(frozen=True)
class TestDecision:
    """Outcome of one test.

    ``normalized`` is the quantity compared with ``threshold``. For the
    two-sided normal-approximation tests the comparison uses its absolute value.
    """

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    normalized: float
    threshold: float
    p_value: float
    reject: bool
    method: Method
    alpha: float

    def as_dict(self) -> dict:
        out = asdict(self)
        out["method"] = self.method.value
        return out
