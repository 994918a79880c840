from .scene_sampler import sample_scene

__all__ = ['sample_scene']
