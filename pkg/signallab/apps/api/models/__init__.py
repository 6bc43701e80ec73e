# Modelos Pydantic
