"""
Tree Homomorphisms - FastAPI Application Entry Point.

HTTP access to the toolkit for homomorphisms from Z^m to the d-regular tree:
1. Exact enumeration: counts and surface tension tables
2. Extension: Kirszbraun extension of partial data on a box
3. Dynamics: bounded chain runs and exact minimum probabilities
4. Variational: entropy minimization over continuum profiles
"""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from slowapi import _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded

from app.api.main import api_router
from app.core.config import settings
from app.core.logging import setup_logging
from app.core.middleware import SecurityHeadersMiddleware, TrustedHostMiddleware
from app.core.rate_limit import limiter

logger = logging.getLogger(__name__)

VERSION = "0.1.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan handler - runs on startup and shutdown."""
    setup_logging(settings.LOG_LEVEL)
    logger.info(
        "%s starting (environment=%s, node budget=%d, max steps=%d)",
        settings.PROJECT_NAME,
        settings.ENVIRONMENT,
        settings.API_NODE_BUDGET,
        settings.API_MAX_STEPS,
    )
    yield
    logger.info("%s stopped", settings.PROJECT_NAME)


app = FastAPI(
    title=settings.PROJECT_NAME,
    description="""
## Tree Homomorphisms

Exact counts, sampling and limit shapes for homomorphisms from the lattice
Z^m to the d-regular tree.

### Endpoints

1. **Enumeration** (`/api/v1/enumerate`)
   - Exact count of the invariant homomorphisms of a slope
   - Surface tension tables ent_n(s)

2. **Extension** (`/api/v1/extend`)
   - Depth-minimal extension of values prescribed inside a box

3. **Dynamics** (`/api/v1/dynamics`)
   - Seeded runs of the adapted or heat-bath chain
   - Exact probability that a local minimum becomes a true minimum

4. **Variational** (`/api/v1/variational`)
   - Entropy minimization with a fixed boundary profile

5. **Configurations** (`/api/v1/configs`)
   - Upload and check TREEHOM v1 files

Heavy endpoints carry a node or step budget; requests over budget get 413.
    """,
    version=VERSION,
    openapi_url=f"{settings.API_V1_STR}/openapi.json",
    docs_url=f"{settings.API_V1_STR}/docs",
    redoc_url=f"{settings.API_V1_STR}/redoc",
    lifespan=lifespan,
)

# =============================================================================
# Middleware Stack (order matters - last added runs first)
# =============================================================================

app.add_middleware(SecurityHeadersMiddleware)

if settings.ALLOWED_HOSTS != ["*"]:
    app.add_middleware(TrustedHostMiddleware, allowed_hosts=settings.ALLOWED_HOSTS)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.all_cors_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# =============================================================================
# Rate Limiting Setup
# =============================================================================

app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)

app.include_router(api_router, prefix=settings.API_V1_STR)


@app.get("/")
async def root():
    """Root endpoint - API info."""
    return {
        "name": settings.PROJECT_NAME,
        "version": VERSION,
        "docs": f"{settings.API_V1_STR}/docs",
        "endpoints": {
            "enumeration": f"{settings.API_V1_STR}/enumerate",
            "extension": f"{settings.API_V1_STR}/extend",
            "dynamics": f"{settings.API_V1_STR}/dynamics",
            "variational": f"{settings.API_V1_STR}/variational",
            "configs": f"{settings.API_V1_STR}/configs",
        },
    }


@app.get("/health")
async def health_check():
    """Health check endpoint for deployment monitoring."""
    return {"status": "healthy"}
