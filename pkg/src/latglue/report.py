"""Small pass/fail report structure shared by verification routines."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [self.title]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            suffix = " (%s)" % c.detail if c.detail else ""
            out.append("  [%s] %s%s" % (mark, c.name, suffix))
        return out
