from typing import List, Optional

from pydantic import BaseModel, Field

from app.schemas.room import Placement, RoomConfig


class RirRequest(BaseModel):
    """RIR 생성 요청"""
    room: RoomConfig
    source: Placement
    mic: Placement
    eta_db: Optional[float] = Field(default=None, gt=0.0)


class RirResponse(BaseModel):
    samples: List[float]
    sample_rate: int
    length: int
    original_length: int
    cutoff_index: Optional[int] = None
    t60_estimate: Optional[float] = None
