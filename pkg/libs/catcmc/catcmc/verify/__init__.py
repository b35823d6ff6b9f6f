from .norms import boundary_norm, fit_decay_exponent, weighted_norm

__all__ = ["boundary_norm", "fit_decay_exponent", "weighted_norm"]
