"""
ProcessAction
~~~~~~~~~~~~~

ProcessAction is a Python package for prescriptive process monitoring. It
mines an explicit Markov decision process from a temporally annotated event
log, learns a KPI-optimal next-activity policy on it with Monte Carlo
reinforcement learning and evaluates that policy by simulation and by
test-log analysis.

:license: MIT, see LICENSE for more details.
"""

__version__ = "0.1.0"
