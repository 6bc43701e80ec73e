# Rotas da API
