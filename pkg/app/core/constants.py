# Output Schemas
    #gap-scan
GAP_SCAN_COLUMNS = ["q", "L", "H", "N", "dim", "form", "gap", "gamma", "method", "residual", "iterations", "seconds"]
SUP_ROW = "sup"
    #xxz
XXZ_COLUMNS = ["Delta", "q", "twiceS", "H", "R", "sector_2n", "dim", "gap", "gap_over_S", "gap_times_R2_over_S", "equivalence_residual"]
    #simulate
SERIES_COLUMNS = ["t", "value"]

# Operator Labels
FULL_FORM = "full"
MODIFIED_FORM = "modified"
BERNOULLI_LAPLACE_FORM = "bernoulli-laplace"
GENERATOR_KIND = "generator"
KERNEL_KIND = "kernel"

# Solver Methods
DENSE_METHOD = "dense"
ITERATIVE_METHOD = "iterative"
AUTO_METHOD = "auto"

# Trend Bands
GAMMA_BAND = 3.0
GAP_OVER_S_BAND = 3.0
GAP_R2_BAND = 4.0

# Exit Codes
EXIT_FAILURE = 1

# Context Logging
SUCCESS_LOG = "success"
ERROR_LOG = "error"
INFO_LOG = "info"

# Header
TOOL_NAME = "exgap"
