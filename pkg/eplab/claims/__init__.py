from ..suite import Suite
from .hep import router as hep_router
from .mp import router as mp_router
from .nep import router as nep_router
from .sd import router as sd_router

suite = Suite(title="eplab")

# Include routers
suite.include_router(mp_router)
suite.include_router(sd_router)
suite.include_router(nep_router)
suite.include_router(hep_router)
