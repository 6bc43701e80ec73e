"""
Ponto de entrada da API FastAPI.
"""

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from signallab import __version__
from signallab.apps.api.routes.analyze import router as analyze_router
from signallab.apps.api.routes.health import router as health_router
from signallab.apps.api.routes.pipeline import router as pipeline_router


app = FastAPI(
    title="SignalLab API",
    description="API para relacionar volume de Tweets classificados com vendas semanais",
    version=__version__,
)

# Configuração de CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:5173", "http://localhost:3000", "http://127.0.0.1:5173"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(health_router)
app.include_router(pipeline_router)
app.include_router(analyze_router)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
