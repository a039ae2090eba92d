# services/data_service.py
"""CSV 입출력 / 모델 직렬화 / 리포트 내보내기 서비스"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd
import yaml

from config.constants import (
    LOAD_GAP_TOL, LOGLIK_COLUMNS, MODEL_FORMAT, PATH_COLUMNS,
    SIMPLE_HMM_FORMAT, SWEEP_COLUMNS, TRACE_COLUMNS,
)
from core.errors import DataIOError, ValidationError
from models.series import DecodedPath, LabeledTrace, ObservationSeries, OccupancyLabels
from models.simple_hmm import SimpleHMM
from models.switching_ar import SwitchingARModel
from solver.base_solver import FitReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _line(idx: int) -> int:
    """DataFrame 행 번호 -> 파일 줄 번호 (헤더가 1번째 줄)"""
    return int(idx) + 2


class DataService:
    """파일 입출력 서비스"""

    # === CSV 읽기 ===

    @staticmethod
    def _read_frame(path: PathLike, required) -> pd.DataFrame:
        path = Path(path)
        if not path.is_file():
            raise DataIOError(f"file not found: {path}")
        try:
            df = pd.read_csv(path, dtype=str, encoding="utf-8", skipinitialspace=True)
        except pd.errors.EmptyDataError as e:
            raise DataIOError(f"{path}: empty file", line=1) from e
        except (pd.errors.ParserError, UnicodeDecodeError) as e:
            raise DataIOError(f"{path}: {e}") from e

        columns = [c.strip() for c in df.columns]
        df.columns = columns
        if columns[:len(required)] != list(required):
            raise DataIOError(
                f"{path}: header must start with {','.join(required)} (got {','.join(columns)})", line=1)
        return df

    @staticmethod
    def _numeric_column(df: pd.DataFrame, name: str, path: PathLike, integer: bool = False) -> np.ndarray:
        raw = df[name]
        arr = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(arr)
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            raise DataIOError(f"{path}: column {name} has invalid value {raw.iloc[idx]!r}", line=_line(idx))
        if integer:
            frac = np.abs(arr - np.round(arr)) > 0
            if frac.any():
                idx = int(np.flatnonzero(frac)[0])
                raise DataIOError(f"{path}: column {name} must hold integers", line=_line(idx))
            return np.round(arr).astype(int)
        return arr

    @staticmethod
    def load_series(path: PathLike, ambient: float) -> ObservationSeries:
        """CO2 CSV 를 초과 농도 시계열로 로드 (y = co2_ppm - ambient)

        간격 오차가 1% 이내이면 t0 + k dt 로 정규화한다.
        음수 y 는 0 으로 자르고 경고한다.
        """
        if ambient is None or not math.isfinite(ambient):
            raise ValidationError(f"ambient: a finite ambient CO2 level is required (got {ambient})")
        df = DataService._read_frame(path, TRACE_COLUMNS[:2])
        timestamps = DataService._numeric_column(df, "timestamp_min", path)
        co2 = DataService._numeric_column(df, "co2_ppm", path)
        if timestamps.size < 2:
            raise DataIOError(f"{path}: at least 2 samples are required (got {timestamps.size})")

        gaps = np.diff(timestamps)
        bad = np.flatnonzero(gaps <= 0)
        if bad.size:
            idx = int(bad[0]) + 1
            raise DataIOError(f"{path}: duplicated or non-increasing timestamp {timestamps[idx]:g}",
                              line=_line(idx))

        dt = (timestamps[-1] - timestamps[0]) / (timestamps.size - 1)
        off = np.flatnonzero(np.abs(gaps - dt) > LOAD_GAP_TOL * dt)
        if off.size:
            idx = int(off[0]) + 1
            raise DataIOError(f"{path}: non-uniform sampling (gap {gaps[idx - 1]:g} vs dt {dt:g})",
                              line=_line(idx))

        y = co2 - ambient
        negative = int((y < 0).sum())
        if negative:
            logger.warning("%s: %d readings below ambient %.1f clamped to 0", path, negative, ambient)
            y = np.maximum(y, 0.0)

        return ObservationSeries(timestamps=timestamps[0] + dt * np.arange(y.size), y=y)

    @staticmethod
    def load_labels(path: PathLike) -> Optional[OccupancyLabels]:
        """참값 라벨 (없으면 None). 행 t (t >= 1) 의 라벨 = 전이 t 의 참값"""
        df = DataService._read_frame(path, TRACE_COLUMNS[:2])
        if "occupancy" not in df.columns:
            return None
        occupancy = DataService._numeric_column(df, "occupancy", path, integer=True)[1:]
        regime = None
        if "regime" in df.columns:
            regime = DataService._numeric_column(df, "regime", path, integer=True)[1:]
        return OccupancyLabels(occupancy, regime)

    @staticmethod
    def load_trace(path: PathLike, ambient: float) -> LabeledTrace:
        """라벨 포함 트레이스 로드"""
        series = DataService.load_series(path, ambient)
        truth = DataService.load_labels(path)
        if truth is None:
            raise DataIOError(f"{path}: an occupancy column is required for scoring", line=1)
        return LabeledTrace(series=series, truth=truth)

    # === CSV 쓰기 ===

    @staticmethod
    def _write_frame(df: pd.DataFrame, path: PathLike):
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            df.to_csv(path, index=False, encoding="utf-8")
        except OSError as e:
            raise DataIOError(f"cannot write {path}: {e.strerror or e}") from e

    @staticmethod
    def trace_frame(trace: LabeledTrace, ambient: float) -> pd.DataFrame:
        """트레이스 -> DataFrame. 행 0 의 라벨은 첫 전이 라벨을 반복"""
        truth = trace.truth
        occupancy = np.concatenate([truth.occupancy[:1], truth.occupancy])
        frame = {
            "timestamp_min": trace.series.timestamps,
            "co2_ppm": trace.series.y + ambient,
            "occupancy": occupancy,
        }
        if truth.regime is not None:
            frame["regime"] = np.concatenate([truth.regime[:1], truth.regime])
        return pd.DataFrame(frame)

    @staticmethod
    def write_trace(trace: LabeledTrace, path: PathLike, ambient: float):
        DataService._write_frame(DataService.trace_frame(trace, ambient), path)

    @staticmethod
    def write_path(decoded: DecodedPath, timestamps, path: PathLike):
        """디코딩 경로 CSV (timestamps 는 t = 1..T)"""
        DataService._write_frame(decoded.to_frame(timestamps), path)

    @staticmethod
    def read_path(path: PathLike) -> DecodedPath:
        """write_path 로 기록한 경로 CSV 로드"""
        df = DataService._read_frame(path, PATH_COLUMNS[:4])
        states = DataService._numeric_column(df, "state", path, integer=True)
        occupancy = DataService._numeric_column(df, "occupancy", path, integer=True)
        regime = DataService._numeric_column(df, "regime", path, integer=True)
        posterior = None
        if "posterior_max" in df.columns:
            values = pd.to_numeric(df["posterior_max"], errors="coerce").to_numpy(dtype=float)
            if not np.isnan(values).all():
                posterior = values
        return DecodedPath(states=states, occupancy=occupancy, regime=regime, posterior_max=posterior)

    @staticmethod
    def write_sweep(table: pd.DataFrame, path: PathLike):
        DataService._write_frame(table[SWEEP_COLUMNS], path)

    # === 모델 / 리포트 ===

    @staticmethod
    def _write_text(text: str, path: PathLike):
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise DataIOError(f"cannot write {path}: {e.strerror or e}") from e

    @staticmethod
    def save_model(model: Union[SwitchingARModel, SimpleHMM], path: PathLike):
        """모델을 YAML 로 저장 (float 는 repr 정밀도)"""
        DataService._write_text(yaml.safe_dump(model.to_dict(), sort_keys=False), path)

    @staticmethod
    def load_model(path: PathLike) -> Union[SwitchingARModel, SimpleHMM]:
        """format 필드에 따라 스위칭 AR 또는 단순 HMM 모델 로드"""
        path = Path(path)
        if not path.is_file():
            raise DataIOError(f"model file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise DataIOError(f"{path}: invalid YAML", line=mark.line + 1 if mark is not None else None) from e
        if not isinstance(data, dict):
            raise ValidationError(f"model: {path} does not hold a model mapping")
        fmt = data.get("format", MODEL_FORMAT)
        if fmt == SIMPLE_HMM_FORMAT:
            return SimpleHMM.from_dict(data)
        return SwitchingARModel.from_dict(data)

    @staticmethod
    def write_fit_report(report: FitReport, prefix: PathLike):
        """<prefix>.report.txt 와 <prefix>.loglik.csv"""
        prefix = str(prefix)
        DataService._write_text(report.summary() + "\n", f"{prefix}.report.txt")
        n_iters = len(report.loglik_trace)
        complete = report.complete_loglik_trace
        if len(complete) != n_iters:
            complete = np.full(n_iters, np.nan)
        loglik = pd.DataFrame({
            LOGLIK_COLUMNS[0]: np.arange(1, n_iters + 1),
            LOGLIK_COLUMNS[1]: report.loglik_trace,
            LOGLIK_COLUMNS[2]: complete,
        })
        DataService._write_frame(loglik, f"{prefix}.loglik.csv")

    @staticmethod
    def write_json(data: Dict[str, Any], path: PathLike):
        DataService._write_text(json.dumps(data, ensure_ascii=False, indent=2) + "\n", path)


def load_series(path: PathLike, ambient: float) -> ObservationSeries:
    return DataService.load_series(path, ambient)


def load_trace(path: PathLike, ambient: float) -> LabeledTrace:
    return DataService.load_trace(path, ambient)


def write_trace(trace: LabeledTrace, path: PathLike, ambient: float):
    DataService.write_trace(trace, path, ambient)


def save_model(model, path: PathLike):
    DataService.save_model(model, path)


def load_model(path: PathLike):
    return DataService.load_model(path)

