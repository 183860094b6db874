"""
API Routes Package.

Contains all route modules for the tree homomorphism API.
"""
from app.api.routes.configs import router as configs_router
from app.api.routes.dynamics import router as dynamics_router
from app.api.routes.enumeration import router as enumeration_router
from app.api.routes.extension import router as extension_router
from app.api.routes.variational import router as variational_router

__all__ = [
    "configs_router",
    "dynamics_router",
    "enumeration_router",
    "extension_router",
    "variational_router",
]
