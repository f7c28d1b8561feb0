import json
import logging
import os

from flask import Flask, abort, jsonify, request, send_file
from werkzeug.middleware.proxy_fix import ProxyFix

from cli import register_commands
from models import RunRecord, db
from suites import ARTIFACT_VERSION


def create_app(test_config=None):
    """Application factory: corpus index database, read-only JSON API and the sforge commands"""
    logging.basicConfig(level=os.environ.get("SFORGE_LOG_LEVEL", "INFO").upper())

    app = Flask(__name__, instance_relative_config=True)
    app.wsgi_app = ProxyFix(app.wsgi_app, x_proto=1, x_host=1)

    # Database configuration
    app.config["SQLALCHEMY_DATABASE_URI"] = os.environ.get("DATABASE_URL", "sqlite:///sforge.db")
    app.config["SQLALCHEMY_ENGINE_OPTIONS"] = {
        "pool_recycle": 300,
        "pool_pre_ping": True,
    }
    app.config["SQLALCHEMY_TRACK_MODIFICATIONS"] = False
    app.config["SFORGE_OUT"] = os.environ.get("SFORGE_OUT", "runs")
    if test_config:
        app.config.update(test_config)

    os.makedirs(app.instance_path, exist_ok=True)
    db.init_app(app)
    with app.app_context():
        db.create_all()

    @app.route('/')
    def index():
        """Corpus summary"""
        verdicts = {}
        for (verdict,) in db.session.query(RunRecord.verdict).all():
            verdicts[verdict] = verdicts.get(verdict, 0) + 1
        return jsonify({
            'name': 'sforge',
            'artifact_version': ARTIFACT_VERSION,
            'runs': sum(verdicts.values()),
            'verdicts': verdicts,
        })

    @app.route('/runs')
    def list_runs():
        """Run records, newest first, optionally filtered by command"""
        query = RunRecord.query
        command = request.args.get('command')
        if command:
            query = query.filter_by(command=command)
        limit = request.args.get('limit', 50, type=int)
        records = query.order_by(RunRecord.created_at.desc(), RunRecord.id.desc()).limit(limit).all()
        return jsonify({'runs': [r.to_dict() for r in records]})

    @app.route('/runs/<int:run_id>')
    def get_run(run_id):
        record = db.get_or_404(RunRecord, run_id)
        payload = record.to_dict()
        try:
            with open(os.path.join(record.run_dir, 'report.json'), encoding='utf-8') as fh:
                payload['report'] = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            logging.error(f"Error reading report for run {run_id}: {e}")
            payload['report'] = None
            payload['error'] = str(e)
        return jsonify(payload)

    @app.route('/runs/<int:run_id>/report')
    def get_report(run_id):
        record = db.get_or_404(RunRecord, run_id)
        path = os.path.abspath(os.path.join(record.run_dir, 'report.json'))
        if not os.path.exists(path):
            abort(404)
        return send_file(path, mimetype='application/json')

    register_commands(app)

    return app
