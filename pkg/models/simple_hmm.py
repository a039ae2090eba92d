# models/simple_hmm.py
"""단순 가우시안 HMM (비교 기준 모델)"""

from dataclasses import dataclass

import numpy as np

from config.constants import SIMPLE_HMM_FORMAT
from core.errors import ValidationError, require
from models.switching_ar import check_distribution, check_stochastic_matrix


@dataclass(frozen=True, eq=False)
class SimpleHMM:
    """무기억 가우시안 방출 HMM. 상태 인덱스 = 재실 인원"""
    means: np.ndarray
    sds: np.ndarray
    trans: np.ndarray
    init: np.ndarray

    def __post_init__(self):
        for name in ("means", "sds", "init", "trans"):
            arr = np.array(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"simple_hmm.{name}: non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.means.shape[0]
        require(self.means.ndim == 1 and n >= 1, "simple_hmm.means", "must be a non-empty vector")
        require(self.sds.shape == (n,), "simple_hmm.sds", f"length must equal {n}")
        require(bool(np.all(self.sds > 0)), "simple_hmm.sds", "must be > 0")
        require(self.init.shape == (n,), "simple_hmm.init", f"length must equal {n}")
        require(self.trans.shape == (n, n), "simple_hmm.trans", f"shape must be ({n}, {n})")
        check_stochastic_matrix(self.trans, "simple_hmm.trans")
        check_distribution(self.init, "simple_hmm.init")

    @property
    def n_states(self) -> int:
        return int(self.means.shape[0])

    @property
    def log_trans(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.trans)

    @property
    def log_init(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.init)

    def sorted_by_mean(self) -> "SimpleHMM":
        """방출 평균 오름차순으로 상태 재배열 (인원 순서 대응)"""
        order = np.argsort(self.means, kind="stable")
        return SimpleHMM(
            means=self.means[order],
            sds=self.sds[order],
            trans=self.trans[np.ix_(order, order)],
            init=self.init[order],
        )

    @classmethod
    def from_dict(cls, data: dict) -> "SimpleHMM":
        """딕셔너리에서 SimpleHMM 생성"""
        if data.get("format", SIMPLE_HMM_FORMAT) != SIMPLE_HMM_FORMAT:
            raise ValidationError(f"simple_hmm.format: unsupported format {data.get('format')!r}")
        return cls(
            means=data["means"],
            sds=data["sds"],
            trans=data["trans"],
            init=data["init"],
        )

    def to_dict(self) -> dict:
        """딕셔너리로 변환"""
        return {
            "format": SIMPLE_HMM_FORMAT,
            "means": [float(v) for v in self.means],
            "sds": [float(v) for v in self.sds],
            "trans": [[float(v) for v in row] for row in self.trans],
            "init": [float(v) for v in self.init],
        }
