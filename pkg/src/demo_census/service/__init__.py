"""HTTP face of the reach-and-correction core.

The service wraps one reach backend behind four endpoints: raw reach
queries, per-geography compilation, correction factors, and
post-stratification. Every endpoint is a thin translation layer over the
library — the CLI and this service share all actual logic.

``create_app`` takes any backend; the module-level ``app`` (what
``uvicorn demo_census.service:app`` serves) lazily builds the bundled demo
population so the service runs out of the box.
"""

from __future__ import annotations

from importlib import resources

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..analysis import compile_platform_census, correction_factors, post_stratify
from ..backends import ReachBackend, SyntheticBackend, spec_key
from ..errors import DemoCensusError, FixtureMiss, GeographyUnknown
from ..population import GenerationConfig, SyntheticPopulation
from ..registry import load_default_registry
from .schemas import (
    AdjustRequest,
    AdjustResponse,
    CompileRequest,
    CompileResponse,
    CorrectionFactorModel,
    CorrectionRequest,
    CorrectionResponse,
    DistributionModel,
    HealthResponse,
    ReachRequest,
    ReachResponse,
)

DEMO_POPULATION_RESOURCE = "demo_population.json"

_NOT_FOUND_ERRORS = (GeographyUnknown, FixtureMiss)


def default_backend() -> SyntheticBackend:
    """Bundled registry + bundled demo population, fixed seed."""
    registry = load_default_registry()
    with resources.as_file(
        resources.files("demo_census.data").joinpath(DEMO_POPULATION_RESOURCE)
    ) as path:
        config = GenerationConfig.from_file(path)
    return SyntheticBackend(SyntheticPopulation(config, registry))


def create_app(backend: ReachBackend | None = None) -> FastAPI:
    if backend is None:
        backend = default_backend()
    app = FastAPI(title="demo-census", description=__doc__)

    @app.exception_handler(DemoCensusError)
    async def _domain_error(request, exc: DemoCensusError) -> JSONResponse:
        status = 404 if isinstance(exc, _NOT_FOUND_ERRORS) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            backend=backend.source,
            registry_states=len(backend.registry.states),
        )

    @app.post("/reach", response_model=ReachResponse)
    def reach(request: ReachRequest) -> ReachResponse:
        spec = request.to_spec()
        estimate = backend.reach(spec)
        return ReachResponse(
            count=estimate.count,
            floor_applied=estimate.floor_applied,
            ambiguous_floor=estimate.ambiguous_floor,
            floor_tainted=estimate.floor_tainted,
            source=estimate.source,
            spec_key=spec_key(spec),
        )

    @app.post("/compile", response_model=CompileResponse)
    def compile_cells(request: CompileRequest) -> CompileResponse:
        dists = compile_platform_census(backend, [request.geo.to_scope()], request.dimensions)
        return CompileResponse(
            distributions=[DistributionModel.from_distribution(d) for d in dists]
        )

    @app.post("/correction-factors", response_model=CorrectionResponse)
    def correct(request: CorrectionRequest) -> CorrectionResponse:
        factors = correction_factors(
            request.platform.to_distribution(),
            request.census.to_distribution(),
            share_basis=request.share_basis,
        )
        return CorrectionResponse(
            factors=[CorrectionFactorModel.from_factor(f) for f in factors]
        )

    @app.post("/adjust", response_model=AdjustResponse)
    def adjust(request: AdjustRequest) -> AdjustResponse:
        adjusted = post_stratify(
            request.audience, [f.to_factor() for f in request.factors]
        )
        return AdjustResponse.from_adjusted(adjusted)

    return app


def __getattr__(name: str):
    # Lazy so importing the package never pays for the demo population.
    if name == "app":
        return create_app()
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
