from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.openapi.utils import get_openapi
from dotenv import load_dotenv
import logging
import os

from app.routers import eigenstates

load_dotenv()

# Configure logging
logging.basicConfig(level=os.getenv("EIGEN_LOG_LEVEL", "INFO").upper())
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Squeeze-Pair Eigenstates API",
    description="""
## Eigenstates of a² + βa†² and ab + βa†b†

Algebraic construction of the eigenstates of the generalized squeezing
operators F₁ = a² + βa†² (one mode) and F₂ = ab + βa†b† (two modes) on
truncated Fock spaces, with their closed-form overlaps.

### Features
- **Eigenstates** built from conjugate operators: exp(λ𝒢†) exp(-βG†)|base>
- **Overlaps** with number, squeezed-vacuum, Caves-Schumaker and coherent states
- **Q-functions** on rectangular grids
- **Position wavefunctions** of the single-mode states (ratios f(x)/f(x0))
- **Acceptance suite** checking every closed form against independent oracles

### Conventions
- States are unnormalized with coefficient 1 on the base state of each
  component (|0> and |1> for F₁, |0,p> or |q,0> for F₂)
- Complex inputs are `*_re` / `*_im` pairs; complex outputs are `[re, im]`
- Pair families are written `"0:p"` or `"q:0"`

### Example Usage
```python
import httpx

data = {"model": "f1", "beta_re": 0.04, "lambda_re": 0.7, "dim": 64}
response = httpx.post("http://localhost:8000/api/eigen/state", json=data)
state = response.json()["state"]
```
    """,
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/openapi.json",
    license_info={
        "name": "MIT",
        "url": "https://opensource.org/licenses/MIT",
    },
    servers=[
        {
            "url": "http://localhost:8000",
            "description": "Development server"
        }
    ]
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(eigenstates.router, tags=["Eigenstates"])


@app.get("/", tags=["Root"], summary="API Information")
async def read_root():
    """
    ## Squeeze-Pair Eigenstates API

    ### Quick Start
    1. **Try it out**: Use the interactive docs at `/docs`
    2. **Build a state**: POST to `/api/eigen/state`
    3. **Check the closed forms**: GET `/api/eigen/verify`
    """
    return {
        "message": "Squeeze-Pair Eigenstates API",
        "version": "1.0.0",
        "documentation": {
            "swagger_ui": "/docs",
            "redoc": "/redoc",
            "openapi_schema": "/openapi.json"
        },
        "models": {
            "f1": "a² + βa†²",
            "f2": "ab + βa†b†"
        },
        "endpoints": {
            "state": "/api/eigen/state",
            "overlap": "/api/eigen/overlap",
            "qfunc": "/api/eigen/qfunc",
            "wavefunction": "/api/eigen/wavefunction",
            "verify": "/api/eigen/verify",
            "health": "/api/eigen/health"
        }
    }


@app.get("/health", tags=["Health"], summary="Health Check")
async def health_check():
    """Returns the current status of the API service."""
    return {
        "status": "healthy",
        "service": "squeeze-pair-eigenstates",
        "version": "1.0.0",
        "components": {
            "fock_space": "ready",
            "special_functions": "ready",
            "conjugates": "ready",
            "oracles": "ready"
        }
    }


# Global exception handler
@app.exception_handler(Exception)
async def global_exception_handler(request, exc):
    logger.error(f"Global exception: {str(exc)}")
    return JSONResponse(
        status_code=500,
        content={
            "error": "Internal server error",
            "detail": "An unexpected error occurred. Please check your request and try again.",
            "type": "server_error"
        }
    )


def custom_openapi():
    if app.openapi_schema:
        return app.openapi_schema

    openapi_schema = get_openapi(
        title=app.title,
        version=app.version,
        description=app.description,
        routes=app.routes,
        license_info=app.license_info
    )

    openapi_schema["tags"] = [
        {
            "name": "Eigenstates",
            "description": "Eigenstate construction, overlaps, Q-functions, wavefunctions and the acceptance suite"
        },
        {
            "name": "Root",
            "description": "API information and navigation endpoints"
        },
        {
            "name": "Health",
            "description": "Service health and status monitoring"
        }
    ]

    if "components" not in openapi_schema:
        openapi_schema["components"] = {}

    openapi_schema["components"]["examples"] = {
        "SingleModeState": {
            "summary": "Single-mode even eigenstate",
            "value": {"model": "f1", "beta_re": 0.04, "lambda_re": 0.7, "dim": 64}
        },
        "PairFamilyState": {
            "summary": "Two-mode eigenstate on the 0:2 family",
            "value": {"model": "f2", "beta_im": 0.09, "lambda_re": 1.0, "lambda_im": 0.3, "dim": 24, "families": ["0:2"]}
        }
    }

    app.openapi_schema = openapi_schema
    return app.openapi_schema


app.openapi = custom_openapi

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host=os.getenv("EIGEN_SERVER_HOST", "127.0.0.1"), port=int(os.getenv("EIGEN_SERVER_PORT", "8000")))
