# core/errors.py
"""예외 정의 모듈"""

from config.constants import EXIT_IO, EXIT_VALIDATION, EXIT_NUMERICAL


class OccupancyError(Exception):
    """패키지 공통 예외 (CLI 종료 코드 포함)"""
    exit_code: int = 1


class ValidationError(OccupancyError, ValueError):
    """설정/불변식 위반"""
    exit_code = EXIT_VALIDATION


class DataIOError(OccupancyError):
    """파일 입출력 및 파싱 오류"""
    exit_code = EXIT_IO

    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(OccupancyError, ArithmeticError):
    """수치 계산 실패"""
    exit_code = EXIT_NUMERICAL


class DegenerateSegmentError(NumericalError):
    """래그 분산이 0인 구간 (회귀 불가)"""


class InitializationError(NumericalError):
    """모든 상태가 데이터 부족 (초기값 문제)"""


def require(condition: bool, field: str, message: str):
    """조건 검사 후 ValidationError 발생"""
    if not condition:
        raise ValidationError(f"{field}: {message}")
