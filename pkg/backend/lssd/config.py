import logging
import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring malformed {name}={raw!r}, using {default}")
        return default


@dataclass(frozen=True)
class Settings:
    """Runtime configuration, read from the environment (and backend/.env)"""

    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    bruteforce_budget: int = 10 ** 8
    permutation_max_d: int = 5
    matching_max_edges: int = 24
    alpha_denominator: int = 10 ** 6
    seed: int = 0
    log_level: str = "INFO"
    log_file: str = "lssd.log"
    host: str = "0.0.0.0"
    port: int = 8000
    threads_from_env: bool = False

    @classmethod
    def from_env(cls, dotenv: bool = True) -> "Settings":
        if dotenv:
            load_dotenv()
        defaults = cls()
        threads_raw = os.environ.get("LSSD_THREADS")
        threads = _env_int("LSSD_THREADS", defaults.threads)
        return cls(
            threads=max(1, threads),
            bruteforce_budget=_env_int("LSSD_BRUTEFORCE_BUDGET", defaults.bruteforce_budget),
            permutation_max_d=_env_int("LSSD_PERMUTATION_MAX_D", defaults.permutation_max_d),
            matching_max_edges=_env_int("LSSD_MATCHING_MAX_EDGES", defaults.matching_max_edges),
            alpha_denominator=max(1, _env_int("LSSD_ALPHA_DENOMINATOR", defaults.alpha_denominator)),
            seed=_env_int("LSSD_SEED", defaults.seed),
            log_level=os.environ.get("LSSD_LOG_LEVEL", defaults.log_level).upper(),
            log_file=os.environ.get("LSSD_LOG_FILE", defaults.log_file),
            host=os.environ.get("BACKEND_HOST", defaults.host),
            port=_env_int("BACKEND_PORT", defaults.port),
            threads_from_env=bool(threads_raw and threads_raw.strip()),
        )

    def resolve_threads(self, requested=None) -> int:
        """LSSD_THREADS wins over an explicit --threads flag."""
        if self.threads_from_env or requested is None:
            return self.threads
        return max(1, int(requested))


def configure_logging(settings: Settings) -> None:
    handlers = [logging.StreamHandler()]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file))
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
