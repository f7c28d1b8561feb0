from flask.cli import FlaskGroup

from app import create_app

cli = FlaskGroup(create_app=create_app, help="sforge: Steinberg group verification suites")

if __name__ == '__main__':
    cli()
