"""Run reports: counters, latency, occupancy, resizes, verdicts."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field


@dataclass(slots=True)
class OpCounts:
    issued: int = 0
    succeeded: int = 0
    failed: int = 0
    not_executed: int = 0

    def add(self, other: "OpCounts") -> None:
        self.issued += other.issued
        self.succeeded += other.succeeded
        self.failed += other.failed
        self.not_executed += other.not_executed


@dataclass(slots=True)
class RunReport:
    """Outcome of one workload run.

    The reconciliation identity (issued == succeeded + failed +
    not-executed, per op type and in total) is checked at validation and
    is itself one of the embedded correctness conditions.
    """

    workload: str
    spec: dict
    duration_s: float = 0.0
    throughput_rps: float = 0.0
    counts: dict = field(default_factory=dict)  # op name -> OpCounts
    latency_mean_ns: float = 0.0
    latency_p99_ns: float = 0.0
    latency_samples: int = 0
    occupancy_end: float = 0.0
    resize_count: int = 0
    transfer_seconds: list = field(default_factory=list)
    growth_factors: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)  # (check name, bool, detail)
    passed: bool = True
    extra: dict = field(default_factory=dict)

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.verdicts.append((name, bool(ok), detail))
        if not ok:
            self.passed = False
        return ok

    def reconcile(self) -> None:
        ok = True
        for name, c in self.counts.items():
            if c.issued != c.succeeded + c.failed + c.not_executed:
                ok = False
        self.check(
            "count-reconciliation",
            ok,
            "issued == succeeded + failed + not_executed for every op type",
        )

    def totals(self) -> OpCounts:
        t = OpCounts()
        for c in self.counts.values():
            t.add(c)
        return t

    # -- outputs ------------------------------------------------------------

    def as_dict(self) -> dict:
        d = asdict(self)
        d["counts"] = {k: asdict(v) for k, v in self.counts.items()}
        d["verdicts"] = [
            {"check": n, "passed": p, "detail": det} for n, p, det in self.verdicts
        ]
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), default=str)

    def to_csv_line(self) -> str:
        t = self.totals()
        cols = [
            self.workload,
            f"{self.duration_s:.6f}",
            f"{self.throughput_rps:.1f}",
            str(t.issued),
            str(t.succeeded),
            str(t.failed),
            str(t.not_executed),
            f"{self.latency_mean_ns:.0f}",
            f"{self.latency_p99_ns:.0f}",
            f"{self.occupancy_end:.4f}",
            str(self.resize_count),
            str(int(self.passed)),
        ]
        return ",".join(cols)

    CSV_HEADER = (
        "workload,duration_s,throughput_rps,issued,succeeded,failed,"
        "not_executed,latency_mean_ns,latency_p99_ns,occupancy,resizes,passed"
    )

    def to_table(self) -> str:
        lines = []
        add = lines.append
        add(f"== {self.workload} ==")
        add(f"  duration        {self.duration_s:.3f} s")
        add(f"  throughput      {self.throughput_rps:,.0f} req/s")
        for name, c in sorted(self.counts.items()):
            add(
                f"  {name:<15} issued {c.issued:>10,}  ok {c.succeeded:>10,}"
                f"  failed {c.failed:>8,}  skipped {c.not_executed:>8,}"
            )
        if self.latency_samples:
            add(
                f"  latency         mean {self.latency_mean_ns:,.0f} ns"
                f"   p99 {self.latency_p99_ns:,.0f} ns"
                f"   ({self.latency_samples} samples)"
            )
        add(f"  occupancy       {self.occupancy_end:.1%}")
        if self.resize_count:
            xfers = ", ".join(f"{s:.3f}s" for s in self.transfer_seconds)
            add(f"  resizes         {self.resize_count}  factors {self.growth_factors}")
            add(f"  transfers       {xfers}")
        for name, ok, detail in self.verdicts:
            mark = "PASS" if ok else "FAIL"
            add(f"  [{mark}] {name}" + (f" — {detail}" if detail else ""))
        add(f"  overall         {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def write_out(self, path: str, fmt: str) -> None:
        with open(path, "a") as f:
            if fmt == "csv":
                if f.tell() == 0:
                    f.write(self.CSV_HEADER + "\n")
                f.write(self.to_csv_line() + "\n")
            else:
                f.write(self.to_json() + "\n")
