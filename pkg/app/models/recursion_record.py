from sqlalchemy import Column, Integer, String, DateTime, JSON, Boolean, UniqueConstraint
from sqlalchemy.sql import func
from app.core.database import Base


class RecursionRecord(Base):
    """A computed inhomogeneous recursion, cached per (p, mode, seed)"""

    __tablename__ = "recursion_records"
    __table_args__ = (UniqueConstraint("p", "mode", "seed", name="uq_recursion_p_mode_seed"),)

    id = Column(Integer, primary_key=True, index=True)
    p = Column(Integer, nullable=False, index=True)
    mode = Column(String, nullable=False)          # symbolic, pointwise
    seed = Column(String, nullable=False)          # 64-bit seeds overflow SQLite integers
    order = Column(Integer, nullable=False)
    payload = Column(JSON, nullable=False)         # TelescopeResult.to_json()
    orientation = Column(String, nullable=True)    # telescoped, printed
    pointwise = Column(Boolean, default=False)
    created_at = Column(DateTime(timezone=True), server_default=func.now())
