# Módulo da API FastAPI
