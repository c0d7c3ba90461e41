from .density_metrics import DensityMetrics
from .moment_metrics import MomentMetrics

__all__ = ["DensityMetrics", "MomentMetrics"]
