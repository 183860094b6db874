"""
Main API Router - Aggregates all route modules.
"""
from fastapi import APIRouter

from app.api.routes import (
    configs_router,
    dynamics_router,
    enumeration_router,
    extension_router,
    variational_router,
)

api_router = APIRouter()

# Exact computations
api_router.include_router(enumeration_router, prefix="/enumerate", tags=["Enumeration"])
api_router.include_router(extension_router, prefix="/extend", tags=["Extension"])

# Sampling
api_router.include_router(dynamics_router, prefix="/dynamics", tags=["Dynamics"])

# Continuum limit
api_router.include_router(variational_router, prefix="/variational", tags=["Variational"])

# File checks
api_router.include_router(configs_router, prefix="/configs", tags=["Configurations"])
