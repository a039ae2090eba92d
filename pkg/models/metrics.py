# models/metrics.py
"""평가 지표 모델"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import require


@dataclass(frozen=True, eq=False)
class MetricsReport:
    """재실 인원 정확도, 환기 모드 정확도, 혼동행렬, 평균 검출 지연"""
    accuracy: float
    confusion: np.ndarray
    mean_detection_delay: float  # 분
    regime_accuracy: Optional[float] = None
    n_steps: int = 0
    n_changes: int = 0

    def __post_init__(self):
        confusion = np.array(self.confusion, dtype=int)
        confusion.setflags(write=False)
        object.__setattr__(self, "confusion", confusion)
        require(confusion.ndim == 2 and confusion.shape[0] == confusion.shape[1],
                "metrics.confusion", "must be square")
        require(bool(np.all(confusion >= 0)), "metrics.confusion", "counts must be >= 0")
        total = confusion.sum()
        if total > 0:
            require(abs(self.accuracy - np.trace(confusion) / total) <= 1e-12,
                    "metrics.accuracy", "must equal trace(confusion) / sum(confusion)")

    def to_dict(self) -> dict:
        """딕셔너리로 변환 (JSON 리포트용)"""
        return {
            "accuracy": float(self.accuracy),
            "regime_accuracy": None if self.regime_accuracy is None else float(self.regime_accuracy),
            "mean_detection_delay_min": float(self.mean_detection_delay),
            "n_steps": int(self.n_steps),
            "n_changes": int(self.n_changes),
            "confusion": self.confusion.tolist(),
        }

    def summary(self) -> str:
        """텍스트 요약"""
        lines = [
            f"accuracy: {self.accuracy:.4f}",
            f"mean_detection_delay_min: {self.mean_detection_delay:.2f}",
            f"steps: {self.n_steps}  change_points: {self.n_changes}",
        ]
        if self.regime_accuracy is not None:
            lines.insert(1, f"regime_accuracy: {self.regime_accuracy:.4f}")
        return "\n".join(lines)
