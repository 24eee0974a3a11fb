from .health_checker import HealthCheckResult, InvariantChecker

__all__ = ['HealthCheckResult', 'InvariantChecker']
