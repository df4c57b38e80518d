"""
Database models and management for recorded runs and search reports
"""

import logging
from typing import List, Optional

from sqlalchemy import Boolean, Column, DateTime, Integer, String, Text, create_engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker
from sqlalchemy.sql import func

logger = logging.getLogger(__name__)

Base = declarative_base()


class RunRecord(Base):
    """One scenario run"""
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True)
    scenario = Column(String(50), nullable=False)
    key_length = Column(Integer, nullable=False)
    seed = Column(Integer)
    message = Column(Integer, nullable=False)
    policy = Column(String(50), nullable=False)
    instance = Column(Text, nullable=False)
    transcript = Column(Text, nullable=False)
    bob_decision = Column(String(10))  # accept, reject, or NULL when undecided
    bob_message = Column(Integer)
    charlie_decision = Column(String(10))
    charlie_message = Column(Integer)
    consistent = Column(Boolean, nullable=False)
    created_at = Column(DateTime, default=func.now())


class ViolationRecord(Base):
    """One strategy reported by a search"""
    __tablename__ = "violations"

    id = Column(Integer, primary_key=True)
    goal = Column(String(50), nullable=False)
    key_length = Column(Integer, nullable=False)
    victim = Column(String(1), nullable=False)
    strategy = Column(Text, nullable=False)
    universal = Column(Boolean, nullable=False)
    witness = Column(Text, nullable=False)
    transcript = Column(Text, nullable=False)
    created_at = Column(DateTime, default=func.now())


class StatsRecord(Base):
    """Acceptance counts of one stats command"""
    __tablename__ = "stats"

    id = Column(Integer, primary_key=True)
    strategy = Column(Text, nullable=False)
    key_length = Column(Integer, nullable=False)
    seed = Column(Integer, nullable=False)
    trials = Column(Integer, nullable=False)
    victim_accept = Column(Integer, nullable=False)
    victim_accept_flipped = Column(Integer, nullable=False)
    counterpart_accept = Column(Integer, nullable=False)
    created_at = Column(DateTime, default=func.now())


class DatabaseManager:
    """Database management class"""

    def __init__(self, database_url: str, echo: bool = False):
        self.engine = create_engine(database_url, echo=echo)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)

    def initialize(self):
        """Initialize database tables"""
        Base.metadata.create_all(bind=self.engine)

    def get_session(self) -> Session:
        """Get database session"""
        return self.SessionLocal()

    def add_all(self, records: List[Base]):
        with self.get_session() as session:
            session.add_all(records)
            session.commit()
        logger.info(f"recorded {len(records)} row(s)")

    def runs(self, scenario: Optional[str] = None) -> List[RunRecord]:
        with self.get_session() as session:
            query = session.query(RunRecord)
            if scenario is not None:
                query = query.filter(RunRecord.scenario == scenario)
            return query.order_by(RunRecord.id).all()

    def violations(self) -> List[ViolationRecord]:
        with self.get_session() as session:
            return session.query(ViolationRecord).order_by(ViolationRecord.id).all()

    def stats(self) -> List[StatsRecord]:
        with self.get_session() as session:
            return session.query(StatsRecord).order_by(StatsRecord.id).all()
