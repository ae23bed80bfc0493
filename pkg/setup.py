#!/usr/bin/env python3
"""
Bootstrap a heatpack checkout: virtual environment, dependencies, .env and a runs directory
"""
import os
import subprocess
import sys
from pathlib import Path

VENV = Path('venv')
BIN = VENV / ('Scripts' if os.name == 'nt' else 'bin')

ENV_TEMPLATE = """# heatpack environment configuration

# Settings profile: development, production, testing or default
HEATPACK_ENV=default

# Worker threads for Gramians, densities and sandwich trials (0 = all cores)
HEATPACK_THREADS=0

# Where run artifacts are written when --out is not given
HEATPACK_OUTPUT_DIR=runs

# Logging
LOG_LEVEL=INFO
"""


def step(label, args):
    """Run one bootstrap step; False when the step fails"""
    print(f"-> {label}")
    result = subprocess.run(args, capture_output=True, text=True)
    if result.returncode != 0:
        print(f"   {label} failed with exit code {result.returncode}")
        print(result.stderr.strip())
        return False
    return True


def write_env():
    env_file = Path('.env')
    if env_file.exists():
        print("-> keeping existing .env")
        return
    env_file.write_text(ENV_TEMPLATE)
    print("-> wrote .env")


def main():
    print("heatpack setup")
    if sys.version_info < (3, 9):
        print("Python 3.9 or newer is required")
        sys.exit(1)

    python = str(BIN / 'python')
    steps = [
        ('virtual environment', [sys.executable, '-m', 'venv', str(VENV)]),
        ('dependencies', [python, '-m', 'pip', 'install', '-r', 'requirements.txt']),
    ]
    if VENV.exists():
        steps = steps[1:]
    for label, args in steps:
        if not step(label, args):
            sys.exit(1)

    write_env()
    Path('runs').mkdir(exist_ok=True)

    if not step('command line smoke test', [python, 'run.py', '--help']):
        sys.exit(1)

    print("\nDone. Try:")
    print(f"   {python} run.py validate --config tests/fixtures/default_1d.cfg --out runs/validate")


def package():
    """Packaging metadata, used when pip or setuptools invoke this file with commands"""
    from setuptools import setup
    setup(
        name='heatpack',
        version='0.0.0',
        package_dir={'': 'engine'},
        packages=['commands', 'config', 'models', 'numerics', 'storage'],
        py_modules=['app', 'errors', 'runner'],
        install_requires=['numpy', 'scipy', 'pandas', 'marshmallow', 'python-dotenv', 'click'],
        python_requires='>=3.9',
    )


if __name__ == '__main__':
    if len(sys.argv) > 1:
        package()
    else:
        main()
