from .fisher import FisherDiscriminant, fisher_fit, fisher_quotient, scatter_matrices
from .probe import ProbeConfig, ProbeExtractor, probe_accuracy, train_probe_extractor
from .snr import SnrCurve, snr_curve
from .svd import ProjectionResult, anisotropy_ratios, svd_project_2d, top_singular_vectors
from .ellipses import EllipseSimConfig, EllipseSimResult, sample_ellipse_points, simulate_two_ellipses

__all__ = [
    'FisherDiscriminant', 'fisher_fit', 'fisher_quotient', 'scatter_matrices',
    'ProbeConfig', 'ProbeExtractor', 'probe_accuracy', 'train_probe_extractor',
    'SnrCurve', 'snr_curve',
    'ProjectionResult', 'anisotropy_ratios', 'svd_project_2d', 'top_singular_vectors',
    'EllipseSimConfig', 'EllipseSimResult', 'sample_ellipse_points', 'simulate_two_ellipses',
]
