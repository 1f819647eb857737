"""Numerical tolerances shared by the LP kernel, branch-and-bound and the replay checks."""

FEASIBILITY = 1e-7
OPTIMALITY = 1e-7
INTEGRALITY = 1e-6
PIVOT = 1e-9
REPLAY = 1e-6
