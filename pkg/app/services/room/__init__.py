from .image_source import enumerate_images, synthesize_rir
from .truncation import estimate_t60, truncate_rir
from .room_service import RoomService

__all__ = ['enumerate_images', 'synthesize_rir', 'estimate_t60', 'truncate_rir', 'RoomService']
