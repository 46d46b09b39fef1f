"""Supervision loss arithmetic over precomputed per-level scalar terms.

The classification / localization scalars per pyramid level come from
detection heads that live outside this library; here they are combined
into per-branch losses and the weighted total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class LevelLossTerms:
    """One pyramid level's precomputed losses and its assigned category label.

    t_star 0 means background; positive values gate the localization term on.
    """

    cls_loss: float
    loc_loss: float
    t_star: int

    def __post_init__(self):
        for name in ("cls_loss", "loc_loss"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.t_star < 0:
            raise ValueError(f"t_star must be >= 0, got {self.t_star}")


@dataclass(frozen=True)
class LossConfig:
    """Branch weights lam / eta (both 0.0625 by default) and the cls/loc balance beta."""

    lam: float = 0.0625
    eta: float = 0.0625
    beta: float = 1.0

    def __post_init__(self):
        for name in ("lam", "eta", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def indicator(t_star: int) -> int:
    """1 iff the label is a foreground category (t_star > 0)."""
    if t_star < 0:
        raise ValueError(f"t_star must be >= 0, got {t_star}")
    return 1 if t_star > 0 else 0


def branch_loss(levels: Sequence[LevelLossTerms], beta: float = 1.0) -> float:
    """Sum over the four pyramid levels of cls + beta * [t* > 0] * loc."""
    if len(levels) != 4:
        raise ValueError(f"branch_loss needs exactly 4 pyramid levels, got {len(levels)}")
    return math.fsum(t.cls_loss + beta * indicator(t.t_star) * t.loc_loss for t in levels)


def sms_total(loss_fuse: float, loss_vrsi: float, loss_irsi: float, cfg: LossConfig = LossConfig()) -> float:
    """Weighted total: fused-branch loss plus lam/eta-weighted unimodal losses."""
    for name, v in (("loss_fuse", loss_fuse), ("loss_vrsi", loss_vrsi), ("loss_irsi", loss_irsi)):
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"{name} must be finite and >= 0, got {v}")
    return math.fsum((loss_fuse, cfg.lam * loss_vrsi, cfg.eta * loss_irsi))
