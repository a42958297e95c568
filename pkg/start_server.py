#!/usr/bin/env python3
"""
Start the eigenstates API server and show where the documentation lives.
"""

import os

import uvicorn
from dotenv import load_dotenv

load_dotenv()


def main():
    host = os.getenv("EIGEN_SERVER_HOST", "127.0.0.1")
    port = int(os.getenv("EIGEN_SERVER_PORT", "8000"))
    base = f"http://{host}:{port}"

    print("Squeeze-Pair Eigenstates API")
    print("=" * 50)
    print(f"Starting server on {base}")
    print(f"Swagger UI: {base}/docs")
    print(f"ReDoc documentation: {base}/redoc")
    print(f"OpenAPI JSON schema: {base}/openapi.json")
    print("=" * 50)

    try:
        uvicorn.run(
            "app.main:app",
            host=host,
            port=port,
            reload=True,
            log_level=os.getenv("EIGEN_LOG_LEVEL", "info").lower()
        )
    except KeyboardInterrupt:
        print("\nServer stopped by user")
    except Exception as e:
        print(f"\nError starting server: {e}")


if __name__ == "__main__":
    main()
