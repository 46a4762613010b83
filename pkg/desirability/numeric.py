"""
Exact rational arithmetic and an exact two-phase simplex solver.

Every scalar in credalkit is a `fractions.Fraction`; nothing in this module
ever touches a float. The solver works on a dense tableau, pivots with
Bland's rule and returns either an optimum with a witness, a Farkas
certificate of infeasibility, or an unboundedness verdict.
"""
import enum
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction

from desirability.exceptions import InputError, SolverError

logger = logging.getLogger(__name__)

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL = re.compile(r'^[+-]?\d+(/\d+)?$')
_FLOATISH = re.compile(r'^[+-]?(\d*\.\d*([eE][+-]?\d+)?|\d+[eE][+-]?\d+|inf|nan)$', re.IGNORECASE)

# ────────────────────────────────────────────────────────────────────────────────

def parse_rat(text):
  token = text.strip()
  if _RATIONAL.match(token):
    numerator, _, denominator = token.partition('/')
    if denominator and int(denominator) == 0:
      raise InputError(f'zero denominator in "{token}"')
    return Fraction(int(numerator), int(denominator) if denominator else 1)
  if _FLOATISH.match(token):
    raise InputError(f'float literal "{token}" is not allowed; write it as p/q')
  raise InputError(f'"{token}" is not a rational number')


def to_rat(value):
  if isinstance(value, Fraction):
    return value
  if isinstance(value, bool): # bool is an int subclass, never a number here
    raise InputError(f'{value!r} is not a rational number')
  if isinstance(value, int):
    return Fraction(value)
  if isinstance(value, str):
    return parse_rat(value)
  raise InputError(f'{value!r} is not an exact rational (floats are rejected)')


def format_rat(value):
  value = to_rat(value)
  return f'{value.numerator}/{value.denominator}'


def dot(u, v):
  return sum((a * b for a, b in zip(u, v)), ZERO)

# ────────────────────────────────────────────────────────────────────────────────
# Dense exact linear algebra (used by vertex and facet enumeration)
# ────────────────────────────────────────────────────────────────────────────────

def _row_echelon(rows, width):
  """Reduced row echelon form; returns (matrix, pivot columns)."""
  matrix = [list(row) for row in rows]
  pivots = []
  r = 0
  for c in range(width):
    pivot = next((i for i in range(r, len(matrix)) if matrix[i][c] != 0), None)
    if pivot is None:
      continue
    matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
    lead = matrix[r][c]
    matrix[r] = [value / lead for value in matrix[r]]
    for i in range(len(matrix)):
      if i != r and matrix[i][c] != 0:
        factor = matrix[i][c]
        matrix[i] = [a - factor * b for a, b in zip(matrix[i], matrix[r])]
    pivots.append(c)
    r += 1
    if r == len(matrix):
      break
  return matrix, pivots


def rank(rows, width):
  return len(_row_echelon(rows, width)[1])


def null_space(rows, width):
  """Basis of {v : row . v = 0 for every row}."""
  matrix, pivots = _row_echelon(rows, width)
  free = [c for c in range(width) if c not in pivots]
  basis = []
  for f in free:
    vector = [ZERO] * width
    vector[f] = ONE
    for i, p in enumerate(pivots):
      vector[p] = -matrix[i][f]
    basis.append(tuple(vector))
  return basis


def solve_square(matrix, rhs):
  """Unique solution of matrix . x = rhs, or None when the matrix is singular."""
  width = len(matrix)
  augmented = [list(row) + [b] for row, b in zip(matrix, rhs)]
  reduced, pivots = _row_echelon(augmented, width)
  if len(pivots) < width:
    return None
  return tuple(reduced[i][width] for i in range(width))

# ────────────────────────────────────────────────────────────────────────────────
# Linear programs
# ────────────────────────────────────────────────────────────────────────────────

class Relation(str, enum.Enum):
  LE = '<='
  EQ = '='
  GE = '>='


class Sense(str, enum.Enum):
  MAX = 'max'
  MIN = 'min'


class LpStatus(str, enum.Enum):
  OPTIMAL = 'Optimal'
  INFEASIBLE = 'Infeasible'
  UNBOUNDED = 'Unbounded'


@dataclass(frozen=True)
class Constraint:
  coefficients: tuple
  relation: Relation
  rhs: Fraction

  def __post_init__(self):
    object.__setattr__(self, 'coefficients', tuple(to_rat(a) for a in self.coefficients))
    object.__setattr__(self, 'relation', Relation(self.relation))
    object.__setattr__(self, 'rhs', to_rat(self.rhs))

  def holds(self, point):
    value = dot(self.coefficients, point)
    if self.relation is Relation.LE:
      return value <= self.rhs
    if self.relation is Relation.GE:
      return value >= self.rhs
    return value == self.rhs


@dataclass(frozen=True)
class LpProblem:
  """
  objective . x -> max/min subject to constraints, lower <= x <= upper.
  A bound of None is infinite. Default bounds are (0, None).
  """
  objective: tuple
  sense: Sense = Sense.MAX
  constraints: tuple = ()
  bounds: tuple = None

  def __post_init__(self):
    objective = tuple(to_rat(c) for c in self.objective)
    object.__setattr__(self, 'objective', objective)
    object.__setattr__(self, 'sense', Sense(self.sense))
    constraints = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints)
    object.__setattr__(self, 'constraints', constraints)
    n = len(objective)
    for i, constraint in enumerate(constraints):
      if len(constraint.coefficients) != n:
        raise InputError(f'constraint {i} has {len(constraint.coefficients)} coefficients, expected {n}')
    if self.bounds is None:
      bounds = tuple((ZERO, None) for _ in range(n))
    else:
      bounds = tuple(
        (None if lo is None else to_rat(lo), None if hi is None else to_rat(hi))
        for lo, hi in self.bounds
      )
    if len(bounds) != n:
      raise InputError(f'{len(bounds)} variable bounds given for {n} variables')
    for j, (lo, hi) in enumerate(bounds):
      if lo is not None and hi is not None and lo > hi:
        raise InputError(f'variable {j} has empty bounds [{lo}, {hi}]')
    object.__setattr__(self, 'bounds', bounds)

  @property
  def n_vars(self):
    return len(self.objective)

  def is_feasible_point(self, point):
    if len(point) != self.n_vars:
      return False
    for value, (lo, hi) in zip(point, self.bounds):
      if (lo is not None and value < lo) or (hi is not None and value > hi):
        return False
    return all(c.holds(point) for c in self.constraints)


@dataclass(frozen=True)
class LpOutcome:
  status: LpStatus
  optimum: Fraction = None
  witness: tuple = None
  farkas: tuple = None # One multiplier per constraint row, see verify_farkas
  pivots: int = 0

  @property
  def is_optimal(self):
    return self.status is LpStatus.OPTIMAL

  @property
  def is_infeasible(self):
    return self.status is LpStatus.INFEASIBLE

  @property
  def is_unbounded(self):
    return self.status is LpStatus.UNBOUNDED


def verify_farkas(problem, multipliers):
  """
  Exact replay of an infeasibility certificate.

  Multipliers y carry one entry per constraint with y <= 0 on '<=' rows,
  y >= 0 on '>=' rows and any sign on '=' rows, so every feasible x obeys
  (sum y_i a_i) . x >= sum y_i b_i. The certificate proves infeasibility when
  the largest value of the left side over the bound box is still smaller.
  """
  if multipliers is None or len(multipliers) != len(problem.constraints):
    return False
  combined = [ZERO] * problem.n_vars
  threshold = ZERO
  for y, constraint in zip(multipliers, problem.constraints):
    if constraint.relation is Relation.LE and y > 0:
      return False
    if constraint.relation is Relation.GE and y < 0:
      return False
    for j, a in enumerate(constraint.coefficients):
      combined[j] += y * a
    threshold += y * constraint.rhs
  best = ZERO
  for c, (lo, hi) in zip(combined, problem.bounds):
    if c > 0:
      if hi is None:
        return False
      best += c * hi
    elif c < 0:
      if lo is None:
        return False
      best += c * lo
  return best < threshold

# ────────────────────────────────────────────────────────────────────────────────

class _Tableau:
  """Dense simplex tableau for min c.z s.t. M z = b, z >= 0, with b >= 0."""

  def __init__(self, rows, rhs, basis):
    self.rows = rows
    self.rhs = rhs
    self.basis = basis
    self.costs = None
    self.reduced = None
    self.pivots = 0

  def price(self, costs):
    self.costs = costs
    self.reduced = list(costs)
    for r, b in enumerate(self.basis):
      cb = costs[b]
      if cb != 0:
        row = self.rows[r]
        for j in range(len(self.reduced)):
          self.reduced[j] -= cb * row[j]

  def value(self):
    return sum((self.costs[b] * self.rhs[r] for r, b in enumerate(self.basis)), ZERO)

  def pivot(self, r, j):
    row = self.rows[r]
    lead = row[j]
    row = [a / lead for a in row]
    self.rows[r] = row
    self.rhs[r] = self.rhs[r] / lead
    for i in range(len(self.rows)):
      if i != r:
        factor = self.rows[i][j]
        if factor != 0:
          self.rows[i] = [a - factor * b for a, b in zip(self.rows[i], row)]
          self.rhs[i] -= factor * self.rhs[r]
    factor = self.reduced[j]
    if factor != 0:
      self.reduced = [a - factor * b for a, b in zip(self.reduced, row)]
    self.basis[r] = j
    self.pivots += 1

  def run(self, allowed):
    """Bland's rule until optimal; returns False when unbounded."""
    while True:
      entering = next((j for j in range(len(self.reduced)) if allowed[j] and self.reduced[j] < 0), None)
      if entering is None:
        return True
      leaving = None
      for r, row in enumerate(self.rows):
        if row[entering] > 0:
          ratio = self.rhs[r] / row[entering]
          if leaving is None or ratio < leaving[0] or (ratio == leaving[0] and self.basis[r] < self.basis[leaving[1]]):
            leaving = (ratio, r)
      if leaving is None:
        return False
      self.pivot(leaving[1], entering)


def solve(problem):
  """Solve an LpProblem exactly. Deterministic for identical input."""
  n = problem.n_vars

  # Substitute every variable by non-negative columns: x = offset + sign * x'
  columns = [] # (original variable, sign)
  offsets = [ZERO] * n
  bound_rows = [] # (column, width) for doubly bounded variables
  for j, (lo, hi) in enumerate(problem.bounds):
    if lo is not None:
      offsets[j] = lo
      columns.append((j, ONE))
      if hi is not None:
        bound_rows.append((len(columns) - 1, hi - lo))
    elif hi is not None:
      offsets[j] = hi
      columns.append((j, -ONE))
    else:
      columns.append((j, ONE))
      columns.append((j, -ONE))
  nx = len(columns)

  standard = [] # (coefficients over x', relation, rhs)
  for constraint in problem.constraints:
    coefficients = [constraint.coefficients[j] * sign for j, sign in columns]
    rhs = constraint.rhs - dot(constraint.coefficients, offsets)
    standard.append((coefficients, constraint.relation, rhs))
  for column, width in bound_rows:
    coefficients = [ZERO] * nx
    coefficients[column] = ONE
    standard.append((coefficients, Relation.LE, width))

  m = len(standard)
  slack_of = {}
  for r, (_, relation, _) in enumerate(standard):
    if relation is not Relation.EQ:
      slack_of[r] = nx + len(slack_of)
  ns = len(slack_of)

  flips = []
  artificial_of = {}
  for r, (coefficients, relation, rhs) in enumerate(standard):
    slack = ONE if relation is Relation.LE else (-ONE if relation is Relation.GE else ZERO)
    flip = -ONE if rhs < 0 else ONE
    flips.append(flip)
    if not (slack * flip == ONE):
      artificial_of[r] = nx + ns + len(artificial_of)
  width = nx + ns + len(artificial_of)

  rows, rhs, basis, initial = [], [], [], []
  for r, (coefficients, relation, b) in enumerate(standard):
    flip = flips[r]
    row = [a * flip for a in coefficients] + [ZERO] * (width - nx)
    if r in slack_of:
      row[slack_of[r]] = (ONE if relation is Relation.LE else -ONE) * flip
    if r in artificial_of:
      row[artificial_of[r]] = ONE
      initial.append(artificial_of[r])
    else:
      initial.append(slack_of[r])
    rows.append(row)
    rhs.append(b * flip)
    basis.append(initial[-1])

  tableau = _Tableau(rows, rhs, basis)
  artificial = set(artificial_of.values())

  # Phase 1
  phase_one = [ONE if j in artificial else ZERO for j in range(width)]
  tableau.price(phase_one)
  tableau.run([True] * width)
  if tableau.value() > 0:
    duals = [phase_one[initial[r]] - tableau.reduced[initial[r]] for r in range(m)]
    farkas = tuple(flips[r] * duals[r] for r in range(len(problem.constraints)))
    if not verify_farkas(problem, farkas):
      raise SolverError('phase one produced an invalid infeasibility certificate')
    logger.debug('LP infeasible after %s pivots', tableau.pivots)
    return LpOutcome(LpStatus.INFEASIBLE, farkas=farkas, pivots=tableau.pivots)

  # Drive artificial columns out of the basis, dropping redundant rows
  r = 0
  while r < len(tableau.rows):
    if tableau.basis[r] in artificial:
      row = tableau.rows[r]
      j = next((j for j in range(width) if j not in artificial and row[j] != 0), None)
      if j is None:
        del tableau.rows[r]
        del tableau.rhs[r]
        del tableau.basis[r]
        continue
      tableau.pivot(r, j)
    r += 1

  # Phase 2
  direction = -ONE if problem.sense is Sense.MAX else ONE
  phase_two = [ZERO] * width
  for column, (j, sign) in enumerate(columns):
    phase_two[column] = direction * problem.objective[j] * sign
  tableau.price(phase_two)
  allowed = [j not in artificial for j in range(width)]
  if not tableau.run(allowed):
    logger.debug('LP unbounded after %s pivots', tableau.pivots)
    return LpOutcome(LpStatus.UNBOUNDED, pivots=tableau.pivots)

  values = [ZERO] * width
  for r, b in enumerate(tableau.basis):
    values[b] = tableau.rhs[r]
  witness = list(offsets)
  for column, (j, sign) in enumerate(columns):
    witness[j] += sign * values[column]
  witness = tuple(witness)
  optimum = dot(problem.objective, witness)
  logger.debug('LP optimal (%s) after %s pivots', optimum, tableau.pivots)
  return LpOutcome(LpStatus.OPTIMAL, optimum=optimum, witness=witness, pivots=tableau.pivots)

# ────────────────────────────────────────────────────────────────────────────────

class LinearProgram:
  """
  Incremental builder for LpProblem, so callers can name variable blocks
  instead of juggling column indices.
  """

  def __init__(self):
    self._bounds = []
    self._rows = []
    self._objective = {}
    self._sense = Sense.MAX

  def variable(self, lower=ZERO, upper=None):
    self._bounds.append((lower, upper))
    return len(self._bounds) - 1

  def variables(self, count, lower=ZERO, upper=None):
    return [self.variable(lower, upper) for _ in range(count)]

  def add(self, coefficients, relation, rhs):
    """coefficients maps variable index -> coefficient (repeats are summed)."""
    self._rows.append((dict_items(coefficients), Relation(relation), to_rat(rhs)))

  def maximize(self, coefficients):
    self._objective = dict(dict_items(coefficients))
    self._sense = Sense.MAX

  def minimize(self, coefficients):
    self._objective = dict(dict_items(coefficients))
    self._sense = Sense.MIN

  def problem(self):
    n = len(self._bounds)
    constraints = []
    for items, relation, rhs in self._rows:
      row = [ZERO] * n
      for j, a in items:
        row[j] += a
      constraints.append(Constraint(tuple(row), relation, rhs))
    objective = [ZERO] * n
    for j, a in self._objective.items():
      objective[j] += a
    return LpProblem(tuple(objective), self._sense, tuple(constraints), tuple(self._bounds))

  def solve(self):
    return solve(self.problem())


def dict_items(coefficients):
  items = coefficients.items() if isinstance(coefficients, dict) else coefficients
  return [(j, to_rat(a)) for j, a in items]
