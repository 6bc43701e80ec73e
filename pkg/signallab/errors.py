"""
Hierarquia de erros do signallab.

Cada classe carrega o código de saída usado pela CLI:
  0 sucesso, 2 entrada/uso, 3 alinhamento, 4 estatística degenerada.

Todas herdam de ValueError para que chamadores da biblioteca possam
capturar o builtin sem conhecer a hierarquia.
"""

from __future__ import annotations

from typing import Optional


class SignalLabError(ValueError):
    """Erro base do projeto."""

    exit_code = 1


class InputError(SignalLabError):
    """Entrada inválida: arquivo ilegível, configuração ou parâmetro fora do contrato."""

    exit_code = 2


class ParseError(InputError):
    """Registro malformado em um arquivo de entrada (com número de linha)."""

    def __init__(self, line: Optional[int], detail: str, path: Optional[str] = None):
        self.line = line
        self.detail = detail
        self.path = path
        super().__init__(self._render())

    def _render(self) -> str:
        message = f"line {self.line}: {self.detail}" if self.line is not None else self.detail
        if self.path:
            return f"{self.path}: {message}"
        return message

    def with_path(self, path: str) -> "ParseError":
        return ParseError(self.line, self.detail, path=path)


class AlignmentError(SignalLabError):
    """Séries sem interseção de semanas."""

    exit_code = 3


class DegenerateStatisticsError(SignalLabError):
    """Estatística sem solução: variância zero, regressores colineares, poucos eventos."""

    exit_code = 4
