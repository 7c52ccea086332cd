#!/usr/bin/env python3
"""
Bootstrap for the LSSD solver suite: venv, requirements, .env and a smoke check
"""

import os
import subprocess
import sys
from pathlib import Path

BACKEND_DIR = Path("backend")

ENV_TEMPLATE = """# Solver configuration
LSSD_THREADS=
LSSD_BRUTEFORCE_BUDGET=100000000
LSSD_PERMUTATION_MAX_D=5
LSSD_MATCHING_MAX_EDGES=24
LSSD_ALPHA_DENOMINATOR=1000000
LSSD_SEED=0

# Logging
LSSD_LOG_LEVEL=INFO
LSSD_LOG_FILE=lssd.log

# Service configuration
BACKEND_HOST=0.0.0.0
BACKEND_PORT=8000
"""


def venv_tool(name):
    folder = "Scripts" if os.name == 'nt' else "bin"
    return str(Path("venv") / folder / name)


def run_step(label, args):
    """Run one bootstrap step inside backend/, reporting success or the captured stderr"""
    try:
        subprocess.run(args, check=True, cwd=BACKEND_DIR, capture_output=True, text=True)
    except (OSError, subprocess.CalledProcessError) as e:
        print(f"✗ {label}")
        print(f"Error: {getattr(e, 'stderr', None) or e}")
        return False
    print(f"✓ {label}")
    return True


def create_venv():
    if (BACKEND_DIR / "venv").exists():
        print("✓ virtual environment already present")
        return True
    return run_step("create virtual environment", [sys.executable, "-m", "venv", "venv"])


def install_requirements():
    return run_step("install requirements", [venv_tool("pip"), "install", "-r", "requirements.txt"])


def write_env():
    env_file = BACKEND_DIR / ".env"
    if env_file.exists():
        print("✓ keeping existing .env")
        return
    env_file.write_text(ENV_TEMPLATE)
    print("✓ wrote .env (leave LSSD_THREADS empty to use every logical core)")


def smoke_check():
    """The quick separation report exits 0 only when all three values match"""
    return run_step("separation report", [venv_tool("python"), "-m", "lssd", "theorem1"])


def main():
    print("🚀 Setting up the LSSD solver suite")
    print("=" * 60)

    if not (BACKEND_DIR / "lssd").exists():
        print("❌ Please run this script from the project root directory")
        sys.exit(1)

    print("\n🔧 Preparing backend...")
    if not (create_venv() and install_requirements()):
        print("❌ Backend setup failed")
        sys.exit(1)
    write_env()

    print("\n🧮 Checking the solvers...")
    if not smoke_check():
        print("⚠️  Solvers installed but the separation report did not pass")

    print("\n✅ Setup completed successfully!")
    print("\n📋 Next steps:")
    print("1. Solve a game: cd backend && venv/bin/python -m lssd pc <game-file>")
    print("2. Start the service: cd backend && venv/bin/python main.py")
    print("3. Run the tests from the project root: backend/venv/bin/pytest -m 'not slow'")


if __name__ == "__main__":
    main()
