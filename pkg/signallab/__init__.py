"""
signallab - relação entre sinais do Twitter e vendas semanais.

Biblioteca + CLI: classificação de Tweets independente de idioma, agregação
semanal, correlação defasada, causalidade de Granger e estudo de eventos.
"""

__version__ = "1.0.0"
