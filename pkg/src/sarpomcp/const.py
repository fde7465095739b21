"""Constants for SarPomcp."""

import math

DEFAULT_SIDE_LENGTH_M = 400.0
DEFAULT_GRID_N = 20
DEFAULT_RASTER_M = 1.0

DEFAULT_MAX_ITERATIONS = 3000
DEFAULT_C_UCT = math.sqrt(2)
DEFAULT_GAMMA = 0.995
DEFAULT_ALPHA = 0.0
DEFAULT_MAX_LEVEL = 5
DEFAULT_MAX_DEPTH = 50
DEFAULT_SAMPLE_COUNT = 16

DEFAULT_TAU = 1
DEFAULT_DELTA_H_M = 3.0
DEFAULT_H_MAX_M = 30.0
DEFAULT_H_INIT_M = 10.0

DEFAULT_MAX_EPOCHS = 100
DEFAULT_SPEED_MPS = 5.0
DEFAULT_TIME_LIMIT_S = 300.0
DEFAULT_TARGET_COUNT = 4

DEFAULT_DISCOUNT_FACTORS = (0.8, 0.9, 0.995)
DEFAULT_ALPHAS = (0.0, 1.0, 10.0)
DEFAULT_SEEDS = 20

# Relative slack on the automatic sparsity threshold; renormalized
# beliefs land a few ulps above 1/|support|.
SPARSITY_SLACK = 1e-9

# Distance fields kept per raster graph; one field is 4 bytes per raster point.
DISTANCE_FIELD_CACHE_SIZE = 128

RESULT_DELIMITER = ","
CONFIG_LINE_PREFIX = "# "
