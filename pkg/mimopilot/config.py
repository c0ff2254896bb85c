import json
import os

from dotenv import load_dotenv

load_dotenv()


def get_conditional_configuration_variable(key, default):
    """Retrieves the configuration variable conditionally.
        ##1. check if variable is in environment
        ##2. check if variable is in config file
        ##3. return default value
    Args:
        key (string): The name of the configuration variable.
        default: The default value of the configuration variable.
    Returns:
        The value of the conditional configuration variable, converted to the type of `default`
        when it came from the environment.
    """  # noqa: E501 // docs

    if os.name == "nt":
        default_path = os.path.join(os.getenv("USERPROFILE", ""), "mimopilot/config.json")
    else:
        default_path = os.path.join(os.getenv("HOME", ""), ".config/mimopilot/config.json")

    # default configuration location
    conf_location = os.getenv(
        "MIMOPILOT_CONFIG_DIR",
        default=default_path,
    )

    if os.path.exists(conf_location):
        with open(conf_location) as f:
            config = json.load(f)
    else:
        config = {}

    if os.getenv(key) is not None:
        return _coerce(os.getenv(key), default)
    elif key in config.keys():
        return config[key]
    else:
        return default


def _coerce(value, default):
    # environment values are strings; follow the type of the default
    if isinstance(default, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(float(value))
    if isinstance(default, float):
        return float(value)
    return value


# metrics
SE_CAP = get_conditional_configuration_variable("SE_CAP", 30.0)

# solvers
EXPA_LIMIT = get_conditional_configuration_variable("EXPA_LIMIT", 10**6)
KMEANS_MAX_ITER = get_conditional_configuration_variable("KMEANS_MAX_ITER", 100)
KMEANS_TOL = get_conditional_configuration_variable("KMEANS_TOL", 1e-6)

# reference system
DEFAULT_CELLS = get_conditional_configuration_variable("DEFAULT_CELLS", 16)
DEFAULT_USERS = get_conditional_configuration_variable("DEFAULT_USERS", 20)
DEFAULT_ANTENNAS = get_conditional_configuration_variable("DEFAULT_ANTENNAS", 128)
DEFAULT_POPULATION = get_conditional_configuration_variable("DEFAULT_POPULATION", 120)
DEFAULT_GENERATIONS = get_conditional_configuration_variable("DEFAULT_GENERATIONS", 20)
DEFAULT_CROSSOVER = get_conditional_configuration_variable("DEFAULT_CROSSOVER", 0.9)
DEFAULT_MUTATION = get_conditional_configuration_variable("DEFAULT_MUTATION", 0.02)
DEFAULT_ELITE = get_conditional_configuration_variable("DEFAULT_ELITE", 2)
DEFAULT_CLUSTERS = get_conditional_configuration_variable("DEFAULT_CLUSTERS", 5)
DEFAULT_RECLUSTER = get_conditional_configuration_variable("DEFAULT_RECLUSTER", 3)
DEFAULT_SEED = get_conditional_configuration_variable("DEFAULT_SEED", 0)

# propagation
DEFAULT_CELL_RADIUS = 500.0
DEFAULT_PATHLOSS_EXPONENT = 3.8
DEFAULT_SHADOW_SIGMA_DB = 8.0
DEFAULT_MIN_DIST = 35.0
DEFAULT_NOISE_POWER = 1.0

FITNESS_SUM_SE = "sum-se"
FITNESS_INTERFERENCE = "cluster-interference"
FITNESS_MAX_MIN = "max-min"
FITNESS_MODES = (FITNESS_SUM_SE, FITNESS_INTERFERENCE, FITNESS_MAX_MIN)

SOLVER_RPA = "rpa"
SOLVER_EXPA = "expa"
SOLVER_GA = "ga"
SOLVER_SKGA = "skga"
SOLVER_PKGA = "pkga"

SIGNIFICANT_DIGITS = get_conditional_configuration_variable("SIGNIFICANT_DIGITS", 12)
TQDM_DISABLE = os.getenv("TQDM_DISABLE", None)
