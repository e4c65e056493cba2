"""Shared numerical constants.

DELTA_PRIME is the admissible rate in the damping-factor bound
S(t, k) <= exp(-delta' * min(nu k^2 t^3, k^2 t / nu)).  A lattice
minimization of the exact exponent against min(x^3, x) (see
tests/test_linflow.py) gives an admissible maximum of about 0.168,
attained at nu*t = 1; 1/12 is kept as a safe round value.
"""

DELTA_PRIME = 1.0 / 12.0

# Taylor/expm1 crossover for the entire functions behind the damping
# closed forms; below this the series is exact to ~1e-18, above it the
# expm1 combination loses at most ~1 digit.
SERIES_SWITCH = 0.5

# Overflow guard for exp() arguments in multipliers and damping factors.
EXP_MAX = 700.0
