from django.core.exceptions import ValidationError

# ────────────────────────────────────────────────────────────────────────────────
# InputError - something the caller typed or passed is malformed (exit code 2)
# ModelError - the model itself is incoherent/inconsistent or a model-level
#              precondition fails (exit code 1)
# ResourceLimitError - a desk-scale bound from settings.CREDALKIT was exceeded
# SolverError - an LP outcome that coherence rules out; always a bug
# ────────────────────────────────────────────────────────────────────────────────

class InputError(ValidationError):
  pass


class DocumentError(InputError):
  def __init__(self, message, line=None, column=None):
    self.line = line
    self.column = column
    if line is not None:
      message = f'line {line}, column {column or 1}: {message}'
    super().__init__(message)


class ModelError(Exception):
  def __init__(self, message, witness=None):
    super().__init__(message)
    self.witness = witness # Whatever proves the failure (multipliers, probe, cell)


class ResourceLimitError(Exception):
  pass


class SolverError(Exception):
  pass
