"""
Ratio CUSUM Change-Point Tests

Forward/backward CUSUM ratio statistics (V, Z, TMAX) and the classical
scaled CUSUM statistics, with Monte Carlo critical values, data generators
for dependent errors, and a size/power experiment harness.

Modules:
- cusum_core: CUSUM functionals, ratio scans, Bartlett long-run variance
- limit_mc: Wiener-path simulation of the limiting laws, critical values, p-values
- datagen: iid, linear, AR(1) and GARCH(1,1) errors with change alternatives
- experiments: rejection-rate studies and the published grids
- repository: JSON persistence of critical-value tables
- io_cli: series files and the command line
"""

__version__ = "1.0.0"
__description__ = "Ratio CUSUM change-point tests with Monte Carlo calibration"
