"""
Strict preference relations over horse lotteries.

A relation is stored as the finite list of asserted pairs; every question is
answered through the convex cone the pairs generate. With a worst outcome z
the cone lives in the gambles through the projection pi (drop the z column),
without one it lives among the bare lottery differences.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

from django.db import models

from desirability.credal import LinearPrevision
from desirability.desirsets import DesirSet, FiniteGenerated, StrictSet, avoids_partial_loss
from desirability.exceptions import InputError, ModelError, SolverError
from desirability.numeric import ONE, ZERO, LinearProgram
from desirability.spaces import Gamble, normalize_worst_act, project_pi

logger = logging.getLogger(__name__)

# ────────────────────────────────────────────────────────────────────────────────

class ArchimedeanClass(models.TextChoices):
  NOT_WEAK = 'not-weak', 'Not weakly Archimedean'
  WEAK_ONLY = 'weak-only', 'Weakly Archimedean only'
  TRADITIONAL = 'traditional', 'Traditionally (and strongly) Archimedean'


class PreferenceRelation:
  def __init__(self, space, pairs=()):
    self.space = space
    self.pairs = tuple(pairs)
    for p, q in self.pairs:
      if p.space != space or q.space != space:
        raise InputError('preference pair lives on another space')
      if p == q:
        raise InputError('a lottery cannot be strictly preferred to itself')

  def __repr__(self):
    return f'PreferenceRelation({len(self.pairs)} pairs)'

  @classmethod
  def from_worst_act(cls, pairs, w):
    """Relation whose worst act w is moved onto z, with the permutation that did it."""
    mapped, permutation = normalize_worst_act(pairs, w)
    return cls(w.space, mapped), permutation

  @property
  def has_worst(self):
    return self.space.worst is not None

  @property
  def gamble_space(self):
    return self.space.without_worst()

  def difference(self, p, q):
    """pi(p - q) with a worst outcome, the plain difference without one."""
    if p.space != self.space or q.space != self.space:
      raise InputError('lotteries live on another space than the relation')
    table = p - q
    if self.has_worst:
      return project_pi(table)
    return Gamble(self.gamble_space, table.rows)

  @cached_property
  def generators(self):
    return tuple(self.difference(p, q) for p, q in self.pairs)

  @cached_property
  def desirset(self):
    return FiniteGenerated(self.gamble_space, self.generators)

# ────────────────────────────────────────────────────────────────────────────────

def _bare_cone_lp(generators, target=None):
  """lambda >= 0 with sum lambda g = target (or = 0 with sum lambda = 1)."""
  lp = LinearProgram()
  weights = lp.variables(len(generators))
  size = generators[0].space.size if generators else (target.space.size if target else 0)
  for c in range(size):
    value = ZERO if target is None else target.flat[c]
    lp.add({w: g.flat[c] for w, g in zip(weights, generators)}, '=', value)
  if target is None:
    lp.add({w: ONE for w in weights}, '=', ONE)
  lp.maximize({})
  return lp.solve()


def is_consistent(relation):
  if relation.has_worst:
    return avoids_partial_loss(relation.generators)[0]
  if not relation.generators:
    return True
  return _bare_cone_lp(relation.generators).is_infeasible


def _require_consistent(relation):
  if not is_consistent(relation):
    logger.warning('rejected inconsistent relation with %s pairs', len(relation.pairs))
    raise ModelError('preference relation is not consistent')


def holds(relation, p, q):
  """p strictly preferred to q in the closure of the relation."""
  if isinstance(relation, RelationOracle):
    return relation.holds(p, q)
  _require_consistent(relation)
  difference = relation.difference(p, q)
  if relation.has_worst:
    return relation.desirset.member(difference).member
  if difference.is_zero() or not relation.generators:
    return False
  return _bare_cone_lp(relation.generators, difference).is_optimal


def dominates(p, q):
  """Objective preference: pi(p) >= pi(q) and pi(p) != pi(q)."""
  if p.space != q.space:
    raise InputError('lotteries live on different spaces')
  return project_pi(p - q).is_positive()

# ────────────────────────────────────────────────────────────────────────────────

def to_desirset(relation):
  if not relation.has_worst:
    raise InputError('a relation without worst outcome needs extend_to_worst_outcome')
  _require_consistent(relation)
  return relation.desirset


@dataclass(frozen=True)
class RelationOracle:
  """p > q exactly when pi(p - q) is desirable."""
  desirset: DesirSet
  worst: str

  def holds(self, p, q):
    if p.space.without_worst() != self.desirset.space or p.space.worst != self.worst:
      raise InputError('lotteries do not live on the space of the oracle')
    return self.desirset.member(project_pi(p - q)).member


def from_desirset(desirset, worst):
  if worst in desirset.space.prizes:
    raise InputError(f'worst outcome "{worst}" is already a prize')
  return RelationOracle(desirset, worst)


def extend_to_worst_outcome(relation):
  """Minimal extension of a bare relation: the cone of its differences plus positive gambles."""
  if relation.has_worst:
    raise InputError('relation already has a worst outcome')
  _require_consistent(relation)
  return relation.desirset


def archimedean_class(model):
  """
  Weak Archimedeanity is strict desirability of the image; with a worst
  outcome it becomes traditional (and strong) once every cell has a
  positive lower prevision.
  """
  if isinstance(model, PreferenceRelation):
    desirset = to_desirset(model) if model.has_worst else extend_to_worst_outcome(model)
  else:
    desirset = model
  if not desirset.is_strictly_desirable():
    return ArchimedeanClass.NOT_WEAK
  for k in range(desirset.space.size):
    if desirset.lower_prevision(Gamble.unit(desirset.space, k)) <= 0:
      return ArchimedeanClass.WEAK_ONLY
  return ArchimedeanClass.TRADITIONAL

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Interpolation:
  superset: StrictSet
  generator: Gamble
  inner: Gamble # In the superset, not in the original cone
  outer: Gamble # In the strict set, not in the superset


def _attaining_prevision(desirset, f):
  """A prevision of M(D) minimizing P(f), from an LP over the simplex."""
  lp = LinearProgram()
  mass = lp.variables(desirset.space.size)
  lp.add({m: ONE for m in mass}, '=', ONE)
  for g in desirset.generators:
    lp.add(dict(zip(mass, g.flat)), '>=', ZERO)
  lp.minimize(dict(zip(mass, f.flat)))
  outcome = lp.solve()
  if not outcome.is_optimal:
    raise SolverError('no prevision attains the lower prevision of a coherent set')
  return LinearPrevision(desirset.space, outcome.witness)


def interpolate_strict_superset(cone, strict):
  """A strict set strictly between a non-Archimedean cone and a strict superset of it."""
  if not isinstance(cone, FiniteGenerated) or type(strict) is not StrictSet:
    raise InputError('interpolation takes a finitely generated set and a strict set without border rays')
  if cone.space != strict.space:
    raise InputError('both sets must live on the same space')
  candidates = [g for g in cone.generators if not g.is_positive()]
  if not candidates:
    raise ModelError('interpolation needs a nonempty cone of non-positive generators')
  for g in cone.generators:
    if not g.is_positive() and strict.credal.lower(g) <= 0:
      raise ModelError('the strict set does not include the cone', witness=g)
  f = candidates[0]
  upper_level = strict.credal.lower(f)
  p_strict = strict.credal.argmin(f)
  p_cone = _attaining_prevision(cone, f)
  if p_cone(f) != 0:
    raise ModelError('interpolation expects a generator with lower prevision 0', witness=f)

  midpoint = [(a + b) / 2 for a, b in zip(p_strict.mass, p_cone.mass)]
  superset = StrictSet(strict.credal.hull_with([midpoint]))
  if superset.credal.lower(f) != upper_level / 2:
    raise SolverError('interpolated lower prevision is not half of the strict one')
  logger.debug('interpolated strict superset at level %s', upper_level / 2)
  return Interpolation(
    superset=superset,
    generator=f,
    inner=f.shift(-upper_level / 4),
    outer=f.shift(-3 * upper_level / 4),
  )
