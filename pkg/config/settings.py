import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


# Folders
FOLDER_DATA = 'data'
FOLDER_SCENARIOS = os.path.join(FOLDER_DATA, 'scenarios')
FOLDER_DEMOS = os.path.join(FOLDER_DATA, 'demos')
FOLDER_REPORTS = 'reports'

# Logging
LOG_LEVEL = str(os.getenv("D2T_LOG_LEVEL", "INFO"))
LOG_FILE = str(os.getenv("D2T_LOG_FILE", ""))
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Keyframe extraction (30 fps demonstrations)
KEYFRAME_EPSILON = _float("D2T_KEYFRAME_EPSILON", 2.0)
KEYFRAME_HALF_WINDOW = _int("D2T_KEYFRAME_HALF_WINDOW", 3)
KEYFRAME_MIN_INTERVAL = _int("D2T_KEYFRAME_MIN_INTERVAL", 15)
LANDMARK_MIN_CONFIDENCE = _float("D2T_LANDMARK_MIN_CONFIDENCE", 0.3)

# Trajectory extraction
RDP_EPSILON_PX = _float("D2T_RDP_EPSILON_PX", 4.0)
DEPTH_FALLBACK_RADIUS_PX = _int("D2T_DEPTH_FALLBACK_RADIUS_PX", 5)

# Trajectory optimization
OPT_W_SMOOTH = _float("D2T_OPT_W_SMOOTH", 1.0)
OPT_W_COLL = _float("D2T_OPT_W_COLL", 1.0)
OPT_PHI = _float("D2T_OPT_PHI", 0.05)
OPT_STEP_SIZE = _float("D2T_OPT_STEP_SIZE", 0.05)
OPT_SHRINK_FACTOR = _float("D2T_OPT_SHRINK_FACTOR", 0.5)
OPT_MAX_ITERS = _int("D2T_OPT_MAX_ITERS", 200)
OPT_COST_TOL = _float("D2T_OPT_COST_TOL", 1e-6)
OPT_MAX_DISPLACEMENT = _float("D2T_OPT_MAX_DISPLACEMENT", 0.05)

# Kinematic simulator
SIM_CLEARANCE = _float("D2T_SIM_CLEARANCE", 0.02)
SIM_GRASP_RADIUS = _float("D2T_SIM_GRASP_RADIUS", 0.03)
SIM_VERIFY_TOLERANCE = _float("D2T_SIM_VERIFY_TOLERANCE", 0.01)
SIM_STEP_LENGTH = _float("D2T_SIM_STEP_LENGTH", 0.01)
SIM_REPLAN_BUDGET = _int("D2T_SIM_REPLAN_BUDGET", 2)
SIM_APPROACH_HEIGHT = _float("D2T_SIM_APPROACH_HEIGHT", 0.06)

# Fixture models
FIXTURE_ROLLOUT_FRAMES = _int("D2T_FIXTURE_ROLLOUT_FRAMES", 16)
FIXTURE_LIFT_HEIGHT = _float("D2T_FIXTURE_LIFT_HEIGHT", 0.15)
FIXTURE_PLANNER_CONTEXT = _int("D2T_FIXTURE_PLANNER_CONTEXT", 24)
FIXTURE_SLOT_SPACING = _float("D2T_FIXTURE_SLOT_SPACING", 0.06)

# Remote model adapters
ADAPTER_TIMEOUT = _float("D2T_ADAPTER_TIMEOUT", 30.0)
ADAPTER_RETRIES = _int("D2T_ADAPTER_RETRIES", 2)
ADAPTER_MAX_IN_FLIGHT = _int("D2T_ADAPTER_MAX_IN_FLIGHT", 4)
ADAPTER_API_TOKEN = str(os.getenv("D2T_ADAPTER_API_TOKEN", ""))

# Endpoints per model role (empty means fixture)
PLANNER_ENDPOINT = str(os.getenv("D2T_PLANNER_ENDPOINT", ""))
GENERATOR_ENDPOINT = str(os.getenv("D2T_GENERATOR_ENDPOINT", ""))
TRACKER_ENDPOINT = str(os.getenv("D2T_TRACKER_ENDPOINT", ""))
DEPTH_ENDPOINT = str(os.getenv("D2T_DEPTH_ENDPOINT", ""))
SELECTOR_ENDPOINT = str(os.getenv("D2T_SELECTOR_ENDPOINT", ""))

# Batch harness
BATCH_TRIALS = _int("D2T_BATCH_TRIALS", 20)
BATCH_SEED = _int("D2T_BATCH_SEED", 0)
