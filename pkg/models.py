from datetime import datetime

from flask_sqlalchemy import SQLAlchemy
from sqlalchemy.orm import DeclarativeBase


class Base(DeclarativeBase):
    pass


db = SQLAlchemy(model_class=Base)


class RunRecord(db.Model):
    """Index entry for one run directory of the regression corpus"""

    __tablename__ = 'run_records'

    id = db.Column(db.Integer, primary_key=True)
    command = db.Column(db.String(32), nullable=False, index=True)
    config_hash = db.Column(db.String(64), nullable=False, index=True)
    seed = db.Column(db.Integer, nullable=False)
    run_dir = db.Column(db.String(512), nullable=False)
    verdict = db.Column(db.String(8), nullable=False)
    violations = db.Column(db.Integer, default=0)
    elapsed = db.Column(db.Float)
    created_at = db.Column(db.DateTime, default=datetime.utcnow)

    def to_dict(self):
        return {
            'id': self.id,
            'command': self.command,
            'config_hash': self.config_hash,
            'seed': self.seed,
            'run_dir': self.run_dir,
            'verdict': self.verdict,
            'violations': self.violations,
            'elapsed': self.elapsed,
            'created_at': self.created_at.isoformat() if self.created_at else None,
        }

    def __repr__(self):
        return f'<RunRecord {self.id} {self.command} {self.verdict}>'
