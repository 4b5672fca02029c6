from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from slowapi import Limiter, _rate_limit_exceeded_handler
from slowapi.util import get_remote_address
from slowapi.errors import RateLimitExceeded
import logging

from app.core.config import settings
from app.core.database import engine, Base
from app.routers.knots.knots_router import router as knots_router
from app.routers.verification.verification_router import router as verification_router

# Import models to ensure they are registered with SQLAlchemy
import app.models.recursion_record

logging.basicConfig(level=settings.LOG_LEVEL)

# Create database tables
Base.metadata.create_all(bind=engine)

# Initialize rate limiter
limiter = Limiter(key_func=get_remote_address)

app = FastAPI(
    title="qtel API",
    description="Exact q-holonomic computations for twist knots: colored Jones values, inhomogeneous recursions and their verification",
    version=settings.APP_VERSION
)

# Add rate limiter
app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)

# CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.ALLOWED_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(knots_router, prefix="/knots", tags=["knots"])
app.include_router(verification_router, prefix="/verification", tags=["verification"])


@app.get("/")
def read_root():
    return {"message": f"Welcome to {settings.APP_NAME}"}


@app.get("/health")
def health_check():
    return {"status": "healthy", "version": settings.APP_VERSION}
