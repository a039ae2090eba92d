# config/constants.py
"""상수 정의 모듈"""

# 앱 정보
APP_NAME = "CO2 Occupancy Tracker"
APP_VERSION = "1.0.0"

# 물리 기본값 (ppm, 분)
DEFAULT_AMBIENT_CO2 = 400.0
DEFAULT_REGIMES = (70.0, 100.0)
DEFAULT_PERSON_RATE = 5.0  # ppm/min per person
DEFAULT_DT = 1.0
DEFAULT_MAX_OCCUPANCY = 4

# 초기화 기본값
DEFAULT_SIGMA0 = 2.0
DEFAULT_SELF_STAY = 0.95

# 피팅 기본값
DEFAULT_MAX_ITERS = 50
DEFAULT_TOL = 1e-6
DEFAULT_MIN_STATE_WEIGHT = 5.0
DEFAULT_TRANSITION_SMOOTHING = 1.0
DEFAULT_WARM_START_STEPS = 5  # 하드 EM 전 Baum-Welch 스텝 수

# 시작점 탐색: 모드별 tau 에 곱하는 기하 격자
START_SEARCH_RANGE = (0.8, 1.25)
START_SEARCH_POINTS = 7

# 수치 한계
SIGMA_FLOOR = 1e-6
C_MIN = 1e-6
C_MAX = 1.0 - 1e-9
SINGULAR_RATIO = 1e-12  # 래그 분산 / 래그 제곱평균 하한 (조건수 1e12 대응)

# 허용 오차
STOCHASTIC_TOL = 1e-12
POSTERIOR_TOL = 1e-9
SPACING_TOL = 1e-9
LOAD_GAP_TOL = 0.01

# 시뮬레이션 기본값
DEFAULT_TOTAL_MINUTES = 1440.0
DEFAULT_MEAN_DWELL = 45.0
DEFAULT_REGIME_MEAN_DWELL = 180.0
DEFAULT_NOISE_SD = 2.0
STEP_MOVE_WEIGHT = 0.8  # ±1 변화 선호 가중치

# 스윕 기본값
DEFAULT_SWEEP_TAUS = (10.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0)
DEFAULT_SWEEP_TRIALS = 5

# CSV 헤더
TRACE_COLUMNS = ["timestamp_min", "co2_ppm", "occupancy", "regime"]
PATH_COLUMNS = ["timestamp_min", "state", "occupancy", "regime", "posterior_max"]
SWEEP_COLUMNS = ["tau_min", "acc_msar", "acc_hmm", "trials"]
LOGLIK_COLUMNS = ["iteration", "objective", "complete_loglik"]

# 모델 직렬화 포맷
MODEL_FORMAT = "msar-model/1"
SIMPLE_HMM_FORMAT = "simple-hmm/1"

# 종료 코드
EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
