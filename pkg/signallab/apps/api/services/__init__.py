# Serviços da API
