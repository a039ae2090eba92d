# models/switching_ar.py
"""스위칭 자기회귀(AR(1)+drift) 모델"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.constants import MODEL_FORMAT, STOCHASTIC_TOL
from core.errors import ValidationError, require
from models.physics import PhysicsConfig
from models.state_space import StateSpace


def _frozen_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"model.{name}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"model.{name}: non-finite entries")
    arr.setflags(write=False)
    return arr


def check_stochastic_matrix(trans: np.ndarray, field: str = "model.trans"):
    """행 확률 행렬 검사"""
    require(trans.ndim == 2 and trans.shape[0] == trans.shape[1], field, "must be square")
    require(bool(np.all(trans >= 0)), field, "entries must be >= 0")
    row_err = np.abs(trans.sum(axis=1) - 1.0)
    require(bool(np.all(row_err <= STOCHASTIC_TOL)), field,
            f"rows must sum to 1 (max error {row_err.max():.3e})")


def check_distribution(init: np.ndarray, field: str = "model.init"):
    """확률 벡터 검사"""
    require(bool(np.all(init >= 0)), field, "entries must be >= 0")
    require(abs(init.sum() - 1.0) <= STOCHASTIC_TOL, field, "must sum to 1")


@dataclass(frozen=True, eq=False)
class SwitchingARModel:
    """상태별 c(i), mu(i), sigma(i) 와 전이행렬, 초기분포"""
    c: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    trans: np.ndarray
    init: np.ndarray
    space: Optional[StateSpace] = None
    physics: Optional[PhysicsConfig] = None

    def __post_init__(self):
        for name in ("c", "mu", "sigma", "init"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), name, 1))
        object.__setattr__(self, "trans", _frozen_array(self.trans, "trans", 2))

        n = self.c.shape[0]
        require(n >= 1, "model.c", "at least one state is required")
        for name in ("mu", "sigma", "init"):
            require(getattr(self, name).shape[0] == n, f"model.{name}", f"length must equal {n}")
        require(self.trans.shape == (n, n), "model.trans", f"shape must be ({n}, {n})")
        require(bool(np.all((self.c > 0) & (self.c < 1))), "model.c", "coefficients must lie in (0, 1)")
        require(bool(np.all(self.sigma > 0)), "model.sigma", "must be > 0")
        check_stochastic_matrix(self.trans)
        check_distribution(self.init)
        if self.space is not None:
            require(self.space.size == n, "model.states", f"state space has {self.space.size} states, model has {n}")
        if self.physics is not None and self.space is not None:
            require(self.physics.n_regimes == self.space.n_regimes
                    and self.physics.max_occupancy == self.space.max_occupancy,
                    "model.physics", "does not match the state space")

    @property
    def n_states(self) -> int:
        return int(self.c.shape[0])

    @property
    def log_trans(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.trans)

    @property
    def log_init(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.init)

    def replace(self, **changes) -> "SwitchingARModel":
        """일부 파라미터만 바꾼 새 모델"""
        data = {
            "c": self.c, "mu": self.mu, "sigma": self.sigma,
            "trans": self.trans, "init": self.init,
            "space": self.space, "physics": self.physics,
        }
        data.update(changes)
        return SwitchingARModel(**data)

    def regime_of(self) -> np.ndarray:
        """상태별 환기 모드 (상태 공간이 없으면 상태마다 별도 그룹)"""
        if self.space is None:
            return np.arange(self.n_states)
        return self.space.regime_array()

    @classmethod
    def from_dict(cls, data: dict) -> "SwitchingARModel":
        """딕셔너리에서 모델 생성"""
        fmt = data.get("format", MODEL_FORMAT)
        if fmt != MODEL_FORMAT:
            raise ValidationError(f"model.format: unsupported format {fmt!r}")
        physics = PhysicsConfig.from_dict(data["physics"]) if data.get("physics") else None
        space = None
        if data.get("states") is not None:
            states = [tuple(s) for s in data["states"]]
            max_occ = max(n for n, _ in states)
            n_regimes = max(k for _, k in states) + 1
            space = StateSpace.from_dict({
                "max_occupancy": max_occ, "n_regimes": n_regimes, "states": states,
            })
        try:
            return cls(
                c=data["c"],
                mu=data["mu"],
                sigma=data["sigma"],
                trans=data["trans"],
                init=data["init"],
                space=space,
                physics=physics,
            )
        except KeyError as e:
            raise ValidationError(f"model.{e.args[0]}: missing section") from e

    def to_dict(self) -> dict:
        """딕셔너리로 변환 (float 는 repr 정밀도로 직렬화됨)"""
        result = {"format": MODEL_FORMAT}
        if self.physics is not None:
            result["physics"] = self.physics.to_dict()
        if self.space is not None:
            result["states"] = [[int(n), int(k)] for n, k in self.space.states]
        result.update({
            "c": [float(v) for v in self.c],
            "mu": [float(v) for v in self.mu],
            "sigma": [float(v) for v in self.sigma],
            "trans": [[float(v) for v in row] for row in self.trans],
            "init": [float(v) for v in self.init],
        })
        return result


def init_from_physics(physics: PhysicsConfig, space: StateSpace,
                      sigma0: float, self_stay: float) -> SwitchingARModel:
    """물리 기반 초기 모델: c = exp(-dt/tau), mu = (1-c) tau r n"""
    physics.validate()
    require(math.isfinite(sigma0) and sigma0 > 0, "init.sigma0", f"must be > 0 (got {sigma0})")
    require(0 < self_stay < 1, "init.self_stay", f"must lie in (0, 1) (got {self_stay})")
    require(space.n_regimes == physics.n_regimes and space.max_occupancy == physics.max_occupancy,
            "init.states", "state space does not match physics")

    n_states = space.size
    c = np.empty(n_states)
    mu = np.empty(n_states)
    for i, (n, k) in enumerate(space.states):
        c[i] = physics.ar_coefficient(k)
        mu[i] = physics.drift(n, k)

    if n_states == 1:
        trans = np.ones((1, 1))
    else:
        off = (1.0 - self_stay) / (n_states - 1)
        trans = np.full((n_states, n_states), off)
        np.fill_diagonal(trans, self_stay)
        trans = trans / trans.sum(axis=1, keepdims=True)

    return SwitchingARModel(
        c=c,
        mu=mu,
        sigma=np.full(n_states, float(sigma0)),
        trans=trans,
        init=np.full(n_states, 1.0 / n_states),
        space=space,
        physics=physics,
    )


def implied_ventilation_times(model: SwitchingARModel, dt: float = None) -> np.ndarray:
    """모드별 c 로부터 tau_hat = -dt / ln(c). 같은 모드 상태들의 c 평균 사용"""
    if dt is None:
        dt = model.physics.dt if model.physics is not None else 1.0
    regimes = model.regime_of()
    taus = []
    for k in range(int(regimes.max()) + 1):
        c_k = float(np.mean(model.c[regimes == k]))
        taus.append(-dt / math.log(c_k))
    return np.array(taus)
