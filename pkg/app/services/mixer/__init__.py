from .mixer_service import compute_gain, make_scene, render

__all__ = ['compute_gain', 'make_scene', 'render']
