"""
Invariant Checker
Validates numerical invariants before a command reports success
"""

from dataclasses import dataclass
from datetime import datetime
from typing import Dict, List

import numpy as np

from src.diffusion.schedule import NoiseSchedule

ALPHA_BAR_END_LIMIT = 0.05


@dataclass
class HealthCheckResult:
    """Result of a health check"""
    check_name: str
    passed: bool
    message: str
    severity: str  # 'info', 'warning', 'error'
    timestamp: datetime


class InvariantChecker:
    """
    Runs invariant checks and collects their results
    """

    def __init__(self):
        """Initialize invariant checker"""
        self.results: List[HealthCheckResult] = []

    def _record(self, name: str, issues: List[str], ok_message: str, severity: str = 'error') -> HealthCheckResult:
        if issues:
            result = HealthCheckResult(check_name=name, passed=False, message="; ".join(issues),
                                       severity=severity, timestamp=datetime.now())
        else:
            result = HealthCheckResult(check_name=name, passed=True, message=ok_message,
                                       severity='info', timestamp=datetime.now())
        self.results.append(result)
        return result

    def check_finite(self, name: str, matrix: np.ndarray) -> HealthCheckResult:
        """
        Check that a matrix holds no NaN or Inf

        Args:
            name: What the matrix is (used in the check name)
            matrix: Values to inspect

        Returns:
            HealthCheckResult
        """
        values = np.asarray(matrix, dtype=np.float64)
        bad = int(values.size - np.count_nonzero(np.isfinite(values)))
        issues = [f"{bad} non-finite entries in {name}"] if bad else []
        return self._record(f"Finite Check - {name}", issues, f"{name}: {values.size} finite entries")

    def check_schedule(self, sched: NoiseSchedule) -> HealthCheckResult:
        """
        Check ᾱ strictly decreasing, inside (0, 1), and signal/noise weights summing to one

        A valid schedule whose last ᾱ stays above ALPHA_BAR_END_LIMIT gets a warning.

        Args:
            sched: Variance schedule

        Returns:
            HealthCheckResult
        """
        ab = sched.alpha_bar
        issues = []
        if np.any(np.diff(ab) >= 0):
            issues.append("alpha_bar is not strictly decreasing")
        if np.any(ab <= 0) or np.any(ab >= 1):
            issues.append("alpha_bar leaves (0, 1)")
        unit = np.sqrt(ab) ** 2 + np.sqrt(1.0 - ab) ** 2
        if np.max(np.abs(unit - 1.0)) > 1e-12:
            issues.append("signal and noise weights do not sum to one")
        if not issues and ab[-1] > ALPHA_BAR_END_LIMIT:
            return self._record("Schedule Check", [
                f"alpha_bar_T={ab[-1]:.3e} is above {ALPHA_BAR_END_LIMIT}; step T still carries the clean signal"
            ], "", severity='warning')
        return self._record("Schedule Check", issues,
                            f"T={sched.num_steps}, alpha_bar_T={ab[-1]:.3e}")

    def check_accuracy_range(self, report) -> HealthCheckResult:
        """
        Check every accuracy of an EvalReport lies in [0, 1] and std >= 0

        Args:
            report: EvalReport

        Returns:
            HealthCheckResult
        """
        accuracies = np.array([r.accuracy for r in report.records])
        issues = []
        if len(accuracies) == 0:
            issues.append("report has no records")
        elif np.any(accuracies < 0) or np.any(accuracies > 1) or not np.all(np.isfinite(accuracies)):
            issues.append("accuracy outside [0, 1]")
        elif report.std < 0:
            issues.append("negative standard deviation")
        label = report.label or report.task
        return self._record(f"Accuracy Range Check - {label}", issues,
                            f"{len(accuracies)} accuracies within [0, 1]" if len(accuracies) else "")

    def check_sign_preservation(self, x0: np.ndarray, x_t: np.ndarray) -> HealthCheckResult:
        """
        Check sign(x_t) == sign(x0) on every nonzero entry of x0

        Args:
            x0: Clean matrix
            x_t: Directionally diffused matrix

        Returns:
            HealthCheckResult
        """
        nonzero = x0 != 0
        flipped = int(np.count_nonzero(np.sign(x_t[nonzero]) != np.sign(x0[nonzero])))
        issues = [f"{flipped} entries changed sign"] if flipped else []
        return self._record("Sign Preservation Check", issues,
                            f"{int(nonzero.sum())} nonzero entries kept their sign")

    def get_summary(self) -> Dict:
        """
        Get summary of all checks

        Returns:
            Dictionary with check summary
        """
        total = len(self.results)
        passed = sum(1 for r in self.results if r.passed)
        failed = total - passed

        errors = [r for r in self.results if not r.passed and r.severity == 'error']
        warnings = [r for r in self.results if not r.passed and r.severity == 'warning']

        return {
            'total_checks': total,
            'passed': passed,
            'failed': failed,
            'pass_rate': (passed / total * 100) if total > 0 else 0,
            'errors': len(errors),
            'warnings': len(warnings),
            'error_details': [r.message for r in errors],
            'warning_details': [r.message for r in warnings],
            'overall_healthy': len(errors) == 0,
        }
