"""Benchmark and verification harness: workload runners, reports, CLI."""

from .report import RunReport
from .workloads import WorkloadSpec, run_workload

__all__ = ["RunReport", "WorkloadSpec", "run_workload"]
