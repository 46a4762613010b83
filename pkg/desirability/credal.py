"""
Linear previsions and credal sets.

A CredalSet keeps both representations: the H-representation is a list of
gambles g with P(g) >= 0 over the probability simplex, the V-representation
is the exact, lexicographically sorted list of its extreme points.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb

from desirability.conf import kernel_setting
from desirability.exceptions import InputError, ModelError, ResourceLimitError
from desirability.numeric import ONE, ZERO, LinearProgram, dot, null_space, rank, solve_square, to_rat
from desirability.spaces import Factor, Gamble, Space

logger = logging.getLogger(__name__)

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class LinearPrevision:
  space: Space
  mass: tuple

  def __post_init__(self):
    mass = tuple(to_rat(m) for m in self.mass)
    if len(mass) != self.space.size:
      raise InputError(f'mass function has {len(mass)} entries for {self.space.size} cells')
    if any(m < 0 for m in mass) or sum(mass) != 1:
      raise InputError('mass function must be non-negative and sum to one')
    object.__setattr__(self, 'mass', mass)

  @classmethod
  def point(cls, space, k):
    mass = [ZERO] * space.size
    mass[k] = ONE
    return cls(space, tuple(mass))

  @classmethod
  def uniform(cls, space):
    return cls(space, (ONE / space.size,) * space.size)

  def __call__(self, f):
    return f.expectation(self.mass)

  def marginal(self, keep):
    keep = Factor(keep)
    rows, width = self.space.omega, len(self.space.prizes)
    if keep == Factor.OMEGA:
      mass = [sum(self.mass[i * width:(i + 1) * width]) for i in range(len(rows))]
    else:
      mass = [sum(self.mass[i * width + j] for i in range(len(rows))) for j in range(width)]
    return LinearPrevision(self.space.factor(keep), tuple(mass))

  def factorizes(self):
    """First cell where P({(w,x)}) != P({w}) P({x}), or None."""
    p_omega, p_x = self.marginal(Factor.OMEGA), self.marginal(Factor.PRIZES)
    for k, (i, j) in enumerate((i, j) for i in range(len(self.space.omega)) for j in range(len(self.space.prizes))):
      if self.mass[k] != p_omega.mass[i] * p_x.mass[j]:
        return k
    return None

  @classmethod
  def product(cls, joint, v_omega, w_prizes):
    return cls(joint, tuple(a * b for a in v_omega.mass for b in w_prizes.mass))

  def __str__(self):
    return ' '.join(f'{m.numerator}/{m.denominator}' for m in self.mass)

# ────────────────────────────────────────────────────────────────────────────────

def _check_subset_budget(count, what):
  limit = kernel_setting('VERTEX_SUBSET_LIMIT')
  if count > limit:
    raise ResourceLimitError(f'{what} needs {count} candidate subsets, above the limit of {limit}')


def enumerate_vertices(space, constraints):
  """
  Extreme points of {p in the simplex : p . g >= 0 for every g}.

  Every vertex makes n - 1 of the inequality rows (p_j >= 0 and the
  constraints) tight, alongside sum p = 1.
  """
  n = space.size
  rows = []
  for j in range(n):
    unit = [ZERO] * n
    unit[j] = ONE
    rows.append(tuple(unit))
  rows.extend(tuple(g.flat) for g in constraints)
  _check_subset_budget(comb(len(rows), n - 1), 'vertex enumeration')

  ones = (ONE,) * n
  rhs = (ZERO,) * (n - 1) + (ONE,)
  found = set()
  for active in combinations(range(len(rows)), n - 1):
    point = solve_square([rows[r] for r in active] + [ones], rhs)
    if point is None:
      continue
    if all(p >= 0 for p in point) and all(dot(g.flat, point) >= 0 for g in constraints):
      found.add(point)
  vertices = sorted(found)
  logger.debug('enumerated %s vertices from %s rows on %s cells', len(vertices), len(rows), n)
  return [LinearPrevision(space, v) for v in vertices]


def hull_weights(points, target):
  """Convex weights expressing target over points, or None."""
  lp = LinearProgram()
  weights = lp.variables(len(points))
  lp.add({w: ONE for w in weights}, '=', ONE)
  for j, value in enumerate(target):
    lp.add({w: p[j] for w, p in zip(weights, points)}, '=', value)
  lp.maximize({})
  outcome = lp.solve()
  return outcome.witness if outcome.is_optimal else None


def _facets(space, vertices):
  """Homogeneous constraints whose simplex slice is exactly the hull of vertices."""
  n = space.size
  points = [v.mass for v in vertices]
  equalities = null_space(points, n)
  constraints = []
  for a in equalities:
    constraints.append(Gamble.from_flat(space, a))
    constraints.append(Gamble.from_flat(space, [-v for v in a]))
  d = rank(points, n)
  if d <= 1:
    return constraints

  _check_subset_budget(comb(len(points), d - 1), 'facet enumeration')
  seen = set()
  for subset in combinations(range(len(points)), d - 1):
    chosen = [points[k] for k in subset]
    if rank(chosen, n) != d - 1:
      continue
    for b in null_space(chosen, n):
      values = [dot(b, p) for p in points]
      if any(v != 0 for v in values):
        break
    else:
      continue
    if all(v >= 0 for v in values):
      normal = b
    elif all(v <= 0 for v in values):
      normal = tuple(-x for x in b)
    else:
      continue
    tight = frozenset(k for k, v in enumerate(values) if v == 0)
    if tight in seen:
      continue
    seen.add(tight)
    constraints.append(Gamble.from_flat(space, normal))
  return constraints


class CredalSet:
  """
  A nonempty polytope of linear previsions on a finite space.

  Vertices are computed on construction so every later query is a pure read.
  """

  def __init__(self, space, constraints=(), vertices=None):
    constraints = tuple(constraints)
    for g in constraints:
      if g.space != space:
        raise InputError('credal constraint lives on another space')
    self.space = space
    self.constraints = constraints
    self.given_vertices = vertices is not None
    if vertices is None:
      vertices = enumerate_vertices(space, constraints)
    else:
      for v in vertices:
        if not all(v(g) >= 0 for g in constraints):
          raise ModelError('a vertex violates a derived facet', witness=v)
    if not vertices:
      raise ModelError('credal set is empty', witness=constraints)
    self.vertices = tuple(vertices)

  @classmethod
  def vacuous(cls, space):
    return cls(space)

  @classmethod
  def precise(cls, prevision):
    return cls.from_vertices(prevision.space, [prevision.mass])

  @classmethod
  def from_vertices(cls, space, masses):
    points = sorted({LinearPrevision(space, m).mass for m in masses})
    if not points:
      raise ModelError('credal set is empty')
    k = 0
    while k < len(points):
      others = points[:k] + points[k + 1:]
      if others and hull_weights(others, points[k]) is not None:
        points.pop(k)
      else:
        k += 1
    vertices = [LinearPrevision(space, p) for p in points]
    return cls(space, _facets(space, vertices), vertices=vertices)

  def __repr__(self):
    return f'CredalSet({len(self.vertices)} vertices on {self.space.size} cells)'

  def __eq__(self, other):
    return isinstance(other, CredalSet) and self.space == other.space and self.vertices == other.vertices

  def __hash__(self):
    return hash((self.space, self.vertices))

  @property
  def is_precise(self):
    return len(self.vertices) == 1

  def lower(self, f):
    return min(v(f) for v in self.vertices)

  def upper(self, f):
    return max(v(f) for v in self.vertices)

  def argmin(self, f):
    return min(self.vertices, key=lambda v: (v(f), v.mass))

  def argmax(self, f):
    return min(self.vertices, key=lambda v: (-v(f), v.mass))

  def contains(self, prevision):
    if prevision.space != self.space:
      return False
    return hull_weights([v.mass for v in self.vertices], prevision.mass) is not None

  def marginal(self, keep):
    """Hull of the projected vertices."""
    return CredalSet.from_vertices(self.space.factor(keep), [v.marginal(keep).mass for v in self.vertices])

  def hull_with(self, masses):
    return CredalSet.from_vertices(self.space, [v.mass for v in self.vertices] + list(masses))
