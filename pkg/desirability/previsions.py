"""
Lower previsions read off a credal set or a set of desirable gambles,
updating by conditional natural extension, and completeness checks.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

from django.db import models

from desirability.credal import CredalSet
from desirability.desirsets import DesirSet, StrictSet
from desirability.exceptions import InputError
from desirability.numeric import ONE
from desirability.spaces import Factor, Gamble

logger = logging.getLogger(__name__)

# ────────────────────────────────────────────────────────────────────────────────

class Scope(models.TextChoices):
  BELIEFS = 'beliefs', 'Beliefs'
  VALUES = 'values', 'Values'
  PREFERENCES = 'preferences', 'Preferences'


class LowerPrevision:
  """A coherent lower prevision backed by a set of desirable gambles or a credal set."""

  def __init__(self, backing):
    if not isinstance(backing, (DesirSet, CredalSet)):
      raise InputError('a lower prevision is backed by a set of desirable gambles or a credal set')
    self.backing = backing

  @property
  def space(self):
    return self.backing.space

  @property
  def credal_set(self):
    return self.backing if isinstance(self.backing, CredalSet) else self.backing.credal_set

  def lower(self, f):
    if isinstance(self.backing, CredalSet):
      if f.space != self.backing.space:
        raise InputError('gamble lives on another space than the credal set')
      return self.backing.lower(f)
    return self.backing.lower_prevision(f)

  def upper(self, f):
    return -self.lower(-f)

  def conditional(self, f, event):
    if isinstance(self.backing, CredalSet):
      return StrictSet(self.backing).conditional_lower_prevision(f, event)
    return self.backing.conditional_lower_prevision(f, event)

  __call__ = lower


def lower_prevision(backing, f):
  return LowerPrevision(backing).lower(f)


def upper_prevision(backing, f):
  return LowerPrevision(backing).upper(f)


def conditional_lower_prevision(backing, f, event):
  return LowerPrevision(backing).conditional(f, event)


def conditional_natural_extension(credal, f, event):
  """
  min_B f when P_(B) = 0, otherwise the smallest V(Bf)/V(B) over the
  vertices; the ratio is linear-fractional so a vertex attains it.
  """
  event.require_nonempty()
  if not event.is_cylinder:
    raise InputError('conditional natural extension updates on events about the states only')
  if f.space != credal.space:
    raise InputError('gamble lives on another space than the credal set')
  indicator = event.indicator()
  if credal.lower(indicator) == 0:
    return f.min(event)
  restricted = f.restrict(event)
  return min(v(restricted) / v(indicator) for v in credal.vertices)


def represents_complete(model, scope=Scope.PREFERENCES):
  credal = LowerPrevision(model).credal_set
  scope = Scope(scope)
  if scope == Scope.PREFERENCES:
    return credal.is_precise
  if scope == Scope.BELIEFS:
    return credal.marginal(Factor.OMEGA).is_precise
  return credal.marginal(Factor.PRIZES).is_precise


def is_linear(model):
  return represents_complete(model, Scope.PREFERENCES)

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class NegativeAdditivityWitness:
  """f and g are not strictly desirable but f + g - epsilon is."""
  f: Gamble
  g: Gamble
  epsilon: Fraction


def negative_additivity_witness(credal):
  """None for a precise credal set, otherwise a witness built from two vertices."""
  if credal.is_precise:
    return None
  first, second = credal.vertices[0], credal.vertices[1]
  h = Gamble.from_flat(credal.space, [a - b for a, b in zip(first.mass, second.mass)])
  a, b = first(h), second(h)
  # first(f) = 1 and second(f) = -1
  f = h.shift(-(a + b) / 2) * (2 / (a - b))
  g = (-f).shift(ONE / 2)
  return NegativeAdditivityWitness(f, g, ONE / 4)
