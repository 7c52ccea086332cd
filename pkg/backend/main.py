from dataclasses import replace
from fractions import Fraction
import logging
from typing import Optional

from dotenv import load_dotenv
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from lssd import __version__
from lssd.certificate import T_STAR, build_report
from lssd.classical import pc_bruteforce
from lssd.config import Settings, configure_logging
from lssd.core_model import (
    alpha_threshold,
    dump_game,
    format_rational,
    noisy_bit_game,
    parse_game,
    point_mass,
    theorem1_game,
)
from lssd.errors import BudgetExceededError, LssdError, ParseError, ValidationError
from lssd.nosignaling import dump_box, pns_binary_inputs, pns_exact
from lssd.quantum import eval_strategy, optimal_state, optimize_qubit, paper_strategy, strategy_to_dict

load_dotenv()

settings = Settings.from_env(dotenv=False)
configure_logging(settings)
logger = logging.getLogger(__name__)

app = FastAPI(title="LSSD solvers", version=__version__)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class GameRequest(BaseModel):
    game: str


class QuantumRequest(BaseModel):
    game: str
    seeds: int = 20
    budget: int = 4000
    seed: Optional[int] = None
    paper_strategy: bool = False


@app.exception_handler(ParseError)
@app.exception_handler(ValidationError)
async def invalid_input_handler(request: Request, exc: LssdError):
    logger.warning(f"Rejected {request.url.path}: {exc}")
    return JSONResponse(status_code=400, content={"error": type(exc).__name__, "detail": str(exc)})


@app.exception_handler(BudgetExceededError)
async def budget_handler(request: Request, exc: BudgetExceededError):
    logger.warning(f"Budget exceeded on {request.url.path}: {exc}")
    return JSONResponse(status_code=413, content={
        "error": "BudgetExceededError",
        "detail": str(exc),
        "required": exc.required,
        "budget": exc.budget,
    })


def builtin_games():
    return {
        "theorem1": theorem1_game(),
        "noisy-bit": noisy_bit_game(alpha_threshold(settings.alpha_denominator)),
        "point-mass": point_mass((2, 1, 1), (0, 0, 0)),
    }


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {"status": "healthy", "version": __version__, "threads": settings.threads}


@app.get("/api/games")
async def get_games():
    """Built-in games in lssd-game text form"""
    return {"games": {name: dump_game(dist) for name, dist in builtin_games().items()}}


@app.post("/api/pc")
def classical_value(request: GameRequest):
    dist = parse_game(request.game)
    value, strat = pc_bruteforce(dist, budget=settings.bruteforce_budget, threads=settings.threads)
    return {"value": format_rational(value), "strategy": [list(table) for table in strat.tables]}


@app.post("/api/pns")
def nosignaling_value(request: GameRequest):
    dist = parse_game(request.game)
    value, box = pns_exact(dist)
    result = {"value": format_rational(value), "box": dump_box(box)}
    if dist.num_parties == 2 and dist.party_sizes == (2, 2) and 2 <= dist.x_size <= settings.permutation_max_d:
        witness = pns_binary_inputs(dist, max_d=settings.permutation_max_d, threads=settings.threads)
        result["binary_inputs"] = {
            "value": format_rational(witness.value),
            "k": witness.k,
            "f": witness.f and [list(table) for table in witness.f],
            "g": witness.g and [list(table) for table in witness.g],
        }
    return result


@app.post("/api/pq-lower")
def quantum_lower_bound(request: QuantumRequest):
    dist = parse_game(request.game)
    if request.paper_strategy:
        strat = paper_strategy()
        value = eval_strategy(dist, strat)
        strat = replace(strat, state=optimal_state(dist, strat))
    else:
        seed = settings.seed if request.seed is None else request.seed
        value, strat = optimize_qubit(dist, seeds=request.seeds, budget=request.budget, seed=seed,
                                      threads=settings.threads)
    return strategy_to_dict(strat, value)


@app.get("/api/verify-sos")
def verify_sos(grid: int = 0):
    return build_report(grid_points=grid or None).to_dict()


@app.get("/api/theorem1")
def theorem1():
    dist = theorem1_game()
    pc, _ = pc_bruteforce(dist)
    pns, _ = pns_exact(dist)
    pq = eval_strategy(dist, paper_strategy())
    report = build_report()
    record = {
        "pc": {"value": format_rational(pc), "expected": "2/5", "pass": pc == Fraction(2, 5)},
        "pq": {"value": pq, "expected": str(T_STAR),
               "pass": abs(pq - float(T_STAR)) <= 1e-9 and report.valid},
        "pns": {"value": format_rational(pns), "expected": "1/2", "pass": pns == Fraction(1, 2)},
    }
    record["pass"] = all(row["pass"] for row in record.values())
    return record


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host=settings.host, port=settings.port)
