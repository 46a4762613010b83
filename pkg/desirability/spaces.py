"""
Finite possibility and prize spaces, gambles, horse lotteries and the maps
between acts and gambles.

Tables are dense and indexed by position: the Space fixes the order of the
states and prizes, labels only matter at the document boundary. The worst
outcome z never appears inside a Gamble; it lives in the Space and in the
z column of act tables.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

from django.db import models

from desirability.exceptions import InputError
from desirability.numeric import ONE, ZERO, dot, to_rat

logger = logging.getLogger(__name__)

UNIT = '*' # Label of the one-point factor used for marginal spaces

# ────────────────────────────────────────────────────────────────────────────────

class Factor(models.TextChoices):
  OMEGA = 'omega', 'States'
  PRIZES = 'prizes', 'Prizes'


@dataclass(frozen=True)
class Space:
  omega: tuple
  prizes: tuple
  worst: str = None

  def __post_init__(self):
    object.__setattr__(self, 'omega', tuple(str(w) for w in self.omega))
    object.__setattr__(self, 'prizes', tuple(str(x) for x in self.prizes))
    if not self.omega:
      raise InputError('a space needs at least one state')
    if not self.prizes:
      raise InputError('a space needs at least one prize')
    if len(set(self.omega)) != len(self.omega):
      raise InputError('state labels must be unique')
    if len(set(self.prizes)) != len(self.prizes):
      raise InputError('prize labels must be unique')
    if self.worst is not None and self.worst in self.prizes:
      raise InputError(f'worst outcome "{self.worst}" is also listed as a prize')

  @property
  def shape(self):
    return len(self.omega), len(self.prizes)

  @property
  def size(self):
    return len(self.omega) * len(self.prizes)

  @property
  def cells(self):
    return [(w, x) for w in self.omega for x in self.prizes]

  @property
  def lottery_prizes(self):
    """Prize columns of a lottery: X, then z when the space has one."""
    return self.prizes + ((self.worst,) if self.worst is not None else ())

  def cell(self, i, j):
    return i * len(self.prizes) + j

  def cell_label(self, k):
    i, j = divmod(k, len(self.prizes))
    return f'{self.omega[i]}:{self.prizes[j]}'

  def state_index(self, label):
    try:
      return self.omega.index(label)
    except ValueError:
      raise InputError(f'unknown state "{label}"')

  def prize_index(self, label):
    try:
      return self.prizes.index(label)
    except ValueError:
      raise InputError(f'unknown prize "{label}"')

  def without_worst(self):
    return Space(self.omega, self.prizes)

  def factor(self, keep):
    keep = Factor(keep)
    if keep == Factor.OMEGA:
      return Space(self.omega, (UNIT,))
    return Space((UNIT,), self.prizes)

  @classmethod
  def joint(cls, omega_space, prize_space, worst=None):
    if omega_space.prizes != (UNIT,) or prize_space.omega != (UNIT,):
      raise InputError('a joint space is built from an omega factor and a prize factor')
    return cls(omega_space.omega, prize_space.prizes, worst)

  def is_factor_of(self, joint, keep):
    return self == joint.factor(keep)

# ────────────────────────────────────────────────────────────────────────────────

def _rows(space, rows, width):
  rows = tuple(tuple(to_rat(v) for v in row) for row in rows)
  if len(rows) != len(space.omega) or any(len(row) != width for row in rows):
    shape = 'x'.join(str(len(row)) for row in rows) or 'empty'
    raise InputError(f'table of shape {shape} does not fit {len(space.omega)} states x {width} columns')
  return rows


@dataclass(frozen=True)
class Gamble:
  space: Space
  rows: tuple

  def __post_init__(self):
    object.__setattr__(self, 'rows', _rows(self.space, self.rows, len(self.space.prizes)))

  @classmethod
  def from_flat(cls, space, values):
    values = tuple(values)
    if len(values) != space.size:
      raise InputError(f'{len(values)} values given for {space.size} cells')
    width = len(space.prizes)
    return cls(space, tuple(values[i:i + width] for i in range(0, len(values), width)))

  @classmethod
  def constant(cls, space, value):
    return cls.from_flat(space, [to_rat(value)] * space.size)

  @classmethod
  def zero(cls, space):
    return cls.constant(space, ZERO)

  @classmethod
  def unit(cls, space, k):
    values = [ZERO] * space.size
    values[k] = ONE
    return cls.from_flat(space, values)

  @property
  def flat(self):
    return tuple(v for row in self.rows for v in row)

  def __getitem__(self, cell):
    i, j = cell
    return self.rows[i][j]

  def _check(self, other):
    if not isinstance(other, Gamble) or other.space != self.space:
      raise InputError('gambles live on different spaces')

  def __add__(self, other):
    self._check(other)
    return Gamble.from_flat(self.space, [a + b for a, b in zip(self.flat, other.flat)])

  def __sub__(self, other):
    self._check(other)
    return Gamble.from_flat(self.space, [a - b for a, b in zip(self.flat, other.flat)])

  def __neg__(self):
    return Gamble.from_flat(self.space, [-a for a in self.flat])

  def __mul__(self, scalar):
    scalar = to_rat(scalar)
    return Gamble.from_flat(self.space, [scalar * a for a in self.flat])

  __rmul__ = __mul__

  def shift(self, value):
    value = to_rat(value)
    return Gamble.from_flat(self.space, [a + value for a in self.flat])

  def restrict(self, event):
    """The gamble B.f: f on B, zero elsewhere."""
    return Gamble.from_flat(self.space, [a if k in event else ZERO for k, a in enumerate(self.flat)])

  def is_zero(self):
    return all(a == 0 for a in self.flat)

  def is_nonnegative(self):
    return all(a >= 0 for a in self.flat)

  def is_positive(self):
    """f >= 0 and f != 0."""
    return self.is_nonnegative() and not self.is_zero()

  def min(self, event=None):
    return min(a for k, a in enumerate(self.flat) if event is None or k in event)

  def max(self, event=None):
    return max(a for k, a in enumerate(self.flat) if event is None or k in event)

  def expectation(self, mass):
    return dot(self.flat, mass)

  def is_measurable(self, keep):
    keep = Factor(keep)
    if keep == Factor.OMEGA:
      return all(len(set(row)) == 1 for row in self.rows)
    return all(row == self.rows[0] for row in self.rows)

  def to_factor(self, keep):
    """The factor gamble of a keep-measurable joint gamble."""
    keep = Factor(keep)
    if not self.is_measurable(keep):
      raise InputError(f'gamble is not {keep.label.lower()}-measurable')
    factor = self.space.factor(keep)
    if keep == Factor.OMEGA:
      return Gamble(factor, tuple((row[0],) for row in self.rows))
    return Gamble(factor, (self.rows[0],))

  def cylinder(self, joint):
    """Extend a factor gamble to the joint space."""
    if self.space.is_factor_of(joint, Factor.OMEGA):
      return Gamble(joint, tuple((row[0],) * len(joint.prizes) for row in self.rows))
    if self.space.is_factor_of(joint, Factor.PRIZES):
      return Gamble(joint, (self.rows[0],) * len(joint.omega))
    raise InputError('gamble does not live on a factor of the joint space')

  def lift(self, i):
    """Constant lift: (w', x) -> f(w_i, x)."""
    return Gamble(self.space, (self.rows[i],) * len(self.space.omega))

  def __str__(self):
    return ' | '.join(' '.join(f'{v.numerator}/{v.denominator}' for v in row) for row in self.rows)

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ActTable:
  """A table over states x lottery prizes (the z column last when present)."""
  space: Space
  rows: tuple

  def __post_init__(self):
    object.__setattr__(self, 'rows', _rows(self.space, self.rows, len(self.space.lottery_prizes)))

  @property
  def flat(self):
    return tuple(v for row in self.rows for v in row)

  def _combine(self, other, sign):
    if other.space != self.space:
      raise InputError('act tables live on different spaces')
    return ActTable(self.space, tuple(
      tuple(a + sign * b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)
    ))

  def __add__(self, other):
    return self._combine(other, ONE)

  def __sub__(self, other):
    return self._combine(other, -ONE)

  def __mul__(self, scalar):
    scalar = to_rat(scalar)
    return ActTable(self.space, tuple(tuple(scalar * a for a in row) for row in self.rows))

  __rmul__ = __mul__


@dataclass(frozen=True)
class HorseLottery:
  space: Space
  masses: tuple

  def __post_init__(self):
    masses = _rows(self.space, self.masses, len(self.space.lottery_prizes))
    for i, row in enumerate(masses):
      if any(m < 0 for m in row) or sum(row) != 1:
        raise InputError(f'row "{self.space.omega[i]}" of a lottery is not a probability mass function')
    object.__setattr__(self, 'masses', masses)

  @classmethod
  def worst_act(cls, space):
    if space.worst is None:
      raise InputError('space has no worst outcome')
    width = len(space.prizes)
    return cls(space, tuple((ZERO,) * width + (ONE,) for _ in space.omega))

  @property
  def table(self):
    return ActTable(self.space, self.masses)

  def __sub__(self, other):
    return self.table - other.table

  def mix(self, other, alpha):
    """alpha * self + (1 - alpha) * other."""
    alpha = to_rat(alpha)
    if not 0 <= alpha <= 1:
      raise InputError('mixture weight must lie in [0, 1]')
    if other.space != self.space:
      raise InputError('lotteries live on different spaces')
    return HorseLottery(self.space, tuple(
      tuple(alpha * a + (1 - alpha) * b for a, b in zip(r, s)) for r, s in zip(self.masses, other.masses)
    ))

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EventSet:
  """A set of cell indices of a Space."""
  space: Space
  cells: frozenset = frozenset()

  def __post_init__(self):
    cells = frozenset(self.cells)
    if any(not 0 <= k < self.space.size for k in cells):
      raise InputError('event refers to cells outside the space')
    object.__setattr__(self, 'cells', cells)

  def __contains__(self, k):
    return k in self.cells

  def __iter__(self):
    return iter(sorted(self.cells))

  def __len__(self):
    return len(self.cells)

  def __bool__(self):
    return bool(self.cells)

  def complement(self):
    return EventSet(self.space, frozenset(range(self.space.size)) - self.cells)

  @classmethod
  def states(cls, space, labels):
    """The cylinder B x X for a set B of state labels."""
    indices = {space.state_index(label) for label in labels}
    width = len(space.prizes)
    return cls(space, (i * width + j for i in indices for j in range(width)))

  @classmethod
  def prize_column(cls, space, label):
    """The cylinder Omega x {x}."""
    j = space.prize_index(label)
    return cls(space, (space.cell(i, j) for i in range(len(space.omega))))

  @classmethod
  def everything(cls, space):
    return cls(space, range(space.size))

  @property
  def is_cylinder(self):
    width = len(self.space.prizes)
    return all(
      all(self.space.cell(i, j) in self for j in range(width)) or not any(self.space.cell(i, j) in self for j in range(width))
      for i in range(len(self.space.omega))
    )

  def indicator(self):
    return Gamble.from_flat(self.space, [ONE if k in self else ZERO for k in range(self.space.size)])

  def require_nonempty(self):
    if not self:
      raise InputError('conditioning event is empty')
    return self

  def labels(self):
    return [self.space.cell_label(k) for k in sorted(self)]

# ────────────────────────────────────────────────────────────────────────────────
# Projections between acts and gambles
# ────────────────────────────────────────────────────────────────────────────────

def project_pi(table):
  """Drop the z column."""
  space = table.space
  if space.worst is None:
    raise InputError('projection needs a space with a worst outcome')
  return Gamble(space.without_worst(), tuple(row[:-1] for row in table.rows))


def pi1_inverse(f, worst):
  """The lottery whose z column takes up the remaining mass of each row."""
  space = Space(f.space.omega, f.space.prizes, worst)
  for i, row in enumerate(f.rows):
    if any(v < 0 or v > 1 for v in row) or sum(row) > 1:
      raise InputError(f'row "{space.omega[i]}" is not the prize part of a lottery')
  return HorseLottery(space, tuple(row + (ONE - sum(row),) for row in f.rows))


def pi2_inverse(f, worst):
  """The zero-row-sum act table whose z column is the negated row sum."""
  space = Space(f.space.omega, f.space.prizes, worst)
  return ActTable(space, tuple(row + (-sum(row),) for row in f.rows))


def is_act_difference(table):
  return all(sum(row) == 0 for row in table.rows)


def support(f):
  return EventSet(f.space, (k for k, v in enumerate(f.flat) if v != 0))

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class GeneratingDecomposition:
  """
  Per state, the prize order used and the non-negative weights of the chain
  generators I_{x_i} - I_{x_(i+1)} along it.
  """
  orders: tuple
  coefficients: tuple

  def reconstruct(self):
    rows = []
    for order, weights in zip(self.orders, self.coefficients):
      row = [ZERO] * len(order)
      for i, weight in enumerate(weights):
        row[order[i]] += weight
        row[order[i + 1]] -= weight
      rows.append(tuple(row))
    return tuple(rows)


def decompose_in_generating_family(f):
  """Works on a Gamble or an ActTable whose rows all sum to zero."""
  orders, coefficients = [], []
  for i, row in enumerate(f.rows):
    if sum(row) != 0:
      raise InputError(f'row "{f.space.omega[i]}" does not sum to zero')
    order = [j for j, v in enumerate(row) if v >= 0] + [j for j, v in enumerate(row) if v < 0]
    weights, running = [], ZERO
    for j in order[:-1]:
      running += row[j]
      weights.append(running)
    orders.append(tuple(order))
    coefficients.append(tuple(weights))
  return GeneratingDecomposition(tuple(orders), tuple(coefficients))

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WorstActPermutation:
  """Per state, the prize column swapped with z (None when w already is z)."""
  swaps: tuple

  def apply(self, lottery):
    masses = []
    for row, column in zip(lottery.masses, self.swaps):
      row = list(row)
      if column is not None:
        row[column], row[-1] = row[-1], row[column]
      masses.append(tuple(row))
    return HorseLottery(lottery.space, tuple(masses))

  # Transpositions are involutions
  invert = apply

  @property
  def is_identity(self):
    return all(column is None for column in self.swaps)


def normalize_worst_act(pairs, w):
  """Move the worst act w onto z, state by state."""
  space = w.space
  if space.worst is None:
    raise InputError('normalizing a worst act needs a space with a worst outcome')
  swaps = []
  for i, row in enumerate(w.masses):
    units = [j for j, m in enumerate(row) if m == 1]
    if len(units) != 1:
      raise InputError(
        f'w cannot be a worst act: its row "{space.omega[i]}" is not degenerate '
        '(a worst act puts unit mass on a single prize in every state)'
      )
    swaps.append(None if units[0] == len(row) - 1 else units[0])
  permutation = WorstActPermutation(tuple(swaps))
  mapped = [(permutation.apply(p), permutation.apply(q)) for p, q in pairs]
  logger.debug('normalized worst act with swaps %s', permutation.swaps)
  return mapped, permutation
