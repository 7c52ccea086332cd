import os
import sys
from fractions import Fraction
from pathlib import Path

import pytest

BACKEND = Path(__file__).parent / "backend"
sys.path.insert(0, str(BACKEND))

# keep test runs from writing lssd.log or picking up a developer's thread count
os.environ["LSSD_LOG_FILE"] = ""
os.environ.pop("LSSD_THREADS", None)

from lssd.config import Settings  # noqa: E402
from lssd.core_model import JointDistribution, dump_game, point_mass, theorem1_game  # noqa: E402


@pytest.fixture
def theorem1():
    return theorem1_game()


@pytest.fixture
def settings():
    return Settings(threads=1, log_file="")


@pytest.fixture
def game_file(tmp_path):
    """Write a game (or raw text) to a file and return its path."""
    def write(game, name="game.txt"):
        path = tmp_path / name
        path.write_text(game if isinstance(game, str) else dump_game(game), encoding="utf-8")
        return path
    return write


@pytest.fixture
def point_mass_game():
    return point_mass((2, 2, 2), (1, 0, 1))


@pytest.fixture
def oversized_game():
    """Full support on 10 x 10 x 10: far beyond any enumeration budget."""
    weight = Fraction(1, 1000)
    entries = {(x, a, b): weight for x in range(10) for a in range(10) for b in range(10)}
    return JointDistribution.from_entries((10, 10, 10), entries)
