"""
Joint models built from a state model and a prize model, and the tests that
tell whether a joint model makes beliefs about states irrelevant to values
of prizes.

Marginals are given on the factor spaces Space(omega, ('*',)) and
Space(('*',), prizes); see Space.factor.
"""
import logging
from dataclasses import dataclass
from itertools import product as cartesian

from django.db import models

from desirability.credal import CredalSet, LinearPrevision, hull_weights
from desirability.desirsets import ConditionalBlock, DesirSet, FamilyExtension, FiniteGenerated, StrictSet
from desirability.exceptions import InputError
from desirability.previsions import LowerPrevision
from desirability.spaces import EventSet, Factor, Gamble, Space

logger = logging.getLogger(__name__)

# ────────────────────────────────────────────────────────────────────────────────

class ProductKind(models.TextChoices):
  MARGINAL_EXTENSION = 'marginal-extension', 'Marginal extension'
  INDEPENDENT = 'independent-natural-extension', 'Independent natural extension'
  STRONG = 'strong', 'Strong product'


class A4Status(models.TextChoices):
  HOLDS_EXACT = 'holds-exact', 'Holds exactly'
  HOLDS_ON_PROBES = 'holds-on-probes', 'Holds on the probes'
  FAILS = 'fails', 'Fails'


def _credal(model):
  if isinstance(model, CredalSet):
    return model
  if isinstance(model, (DesirSet, LowerPrevision)):
    return model.credal_set
  raise InputError('expected a credal set or a set of desirable gambles')


def _finitely_generated(*marginals):
  return all(isinstance(m, FiniteGenerated) for m in marginals)


def constant_lift(f, i):
  """f^w: (w', x) -> f(w_i, x)."""
  return f.lift(i)

# ────────────────────────────────────────────────────────────────────────────────

def marginal_extension_prevision(model_omega, conditionals, f):
  """P_omega applied to w -> P_(f(w, .) | w), the conditionals given per state."""
  credal_omega = _credal(model_omega)
  joint = f.space
  if len(conditionals) != len(joint.omega):
    raise InputError(f'{len(conditionals)} conditional models given for {len(joint.omega)} states')
  prize_space = joint.factor(Factor.PRIZES)
  values = []
  for row, conditional in zip(f.rows, conditionals):
    values.append(_credal(conditional).lower(Gamble(prize_space, (row,))))
  return credal_omega.lower(Gamble(credal_omega.space, tuple((v,) for v in values)))


def marginal_extension_brute_force(model_omega, conditionals, f):
  """Minimum over a state vertex and one conditional vertex per state."""
  credal_omega = _credal(model_omega)
  choices = [_credal(c).vertices for c in conditionals]
  best = None
  for v in credal_omega.vertices:
    for picked in cartesian(*choices):
      value = sum(v.mass[i] * sum(w.mass[j] * f.rows[i][j] for j in range(len(w.mass))) for i, w in enumerate(picked))
      best = value if best is None else min(best, value)
  return best

# Finitely generated marginals: the products are cones on explicit generators

def _state_blocks(joint, prize_generators):
  prize_space = joint.factor(Factor.PRIZES)
  blocks = []
  for state in joint.omega:
    event = EventSet.states(joint, [state])
    for g in prize_generators:
      if g.space != prize_space:
        raise InputError('prize marginal lives on another factor space')
      blocks.append(g.cylinder(joint).restrict(event))
  return blocks


def _prize_blocks(joint, state_generators):
  omega_space = joint.factor(Factor.OMEGA)
  blocks = []
  for prize in joint.prizes:
    event = EventSet.prize_column(joint, prize)
    for g in state_generators:
      if g.space != omega_space:
        raise InputError('state marginal lives on another factor space')
      blocks.append(g.cylinder(joint).restrict(event))
  return blocks

# Credal marginals: the products are natural extensions of conditional blocks

def _factor_credal(model, joint, keep):
  credal = _credal(model)
  if credal.space != joint.factor(keep):
    raise InputError(f'{Factor(keep).label.lower()} marginal lives on another factor space')
  return credal


def _cylinder_block(joint, model_omega):
  """The whole space, with every joint prevision whose state marginal is in the model."""
  credal = _factor_credal(model_omega, joint, Factor.OMEGA)
  lifted = CredalSet(joint, [h.cylinder(joint) for h in credal.constraints])
  return ConditionalBlock(EventSet.everything(joint), lifted)


def _state_conditionals(joint, model_x):
  """{w} x X carrying point(w) x M_X, one block per state."""
  vertices = _factor_credal(model_x, joint, Factor.PRIZES).vertices
  omega_space = joint.factor(Factor.OMEGA)
  blocks = []
  for i, state in enumerate(joint.omega):
    point = LinearPrevision.point(omega_space, i)
    masses = [LinearPrevision.product(joint, point, w).mass for w in vertices]
    blocks.append(ConditionalBlock(EventSet.states(joint, [state]), CredalSet.from_vertices(joint, masses)))
  return blocks


def _prize_conditionals(joint, model_omega):
  """Omega x {x} carrying M_Omega x point(x), one block per prize."""
  vertices = _factor_credal(model_omega, joint, Factor.OMEGA).vertices
  prize_space = joint.factor(Factor.PRIZES)
  blocks = []
  for j, prize in enumerate(joint.prizes):
    point = LinearPrevision.point(prize_space, j)
    masses = [LinearPrevision.product(joint, v, point).mass for v in vertices]
    blocks.append(ConditionalBlock(EventSet.prize_column(joint, prize), CredalSet.from_vertices(joint, masses)))
  return blocks


def irrelevant_product_set(model_omega, model_x):
  """
  Smallest joint set with the state marginal and the prize model in every
  state. A finitely generated marginal that meets a credal one contributes
  its credal set.
  """
  joint = Space.joint(model_omega.space, model_x.space)
  if _finitely_generated(model_omega, model_x):
    cylinders = [g.cylinder(joint) for g in model_omega.generators]
    return FiniteGenerated(joint, cylinders + _state_blocks(joint, model_x.generators))
  blocks = [_cylinder_block(joint, model_omega)] + _state_conditionals(joint, model_x)
  logger.debug('irrelevant product as the natural extension of %s blocks', len(blocks))
  return FamilyExtension(joint, blocks)


def is_irrelevant_product(desirset, model_x):
  """
  Whether I_w g is in the set for every state w and every g desirable under
  the prize model.

  A finitely generated model is checked on its generators. For a credal model
  the desirable gambles are its constraint cone plus positive constants, so
  it is enough that no constraint has a negative conditional lower prevision
  on any {w} x X.
  """
  joint = desirset.space
  if isinstance(model_x, FiniteGenerated):
    return all(desirset.member(g).member for g in _state_blocks(joint, model_x.generators))
  constraints = [h.cylinder(joint) for h in _factor_credal(model_x, joint, Factor.PRIZES).constraints]
  for state in joint.omega:
    event = EventSet.states(joint, [state])
    for h in constraints:
      if desirset.conditional_lower_prevision(h, event) < 0:
        logger.debug('state %s: constraint %s drops below zero', state, h)
        return False
  return True


def independent_natural_extension(model_omega, model_x):
  joint = Space.joint(model_omega.space, model_x.space)
  if _finitely_generated(model_omega, model_x):
    generators = _state_blocks(joint, model_x.generators) + _prize_blocks(joint, model_omega.generators)
    return FiniteGenerated(joint, generators)
  return FamilyExtension(joint, _state_conditionals(joint, model_x) + _prize_conditionals(joint, model_omega))

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class StrongProduct:
  joint: Space
  pairs: tuple # (state vertex, prize vertex)

  @property
  def products(self):
    return [LinearPrevision.product(self.joint, v, w) for v, w in self.pairs]

  @property
  def credal(self):
    return CredalSet.from_vertices(self.joint, [p.mass for p in self.products])

  def lower(self, f):
    """Bilinearity puts the minimum at a pair of vertices."""
    return min(p(f) for p in self.products)

  def upper(self, f):
    return -self.lower(-f)

  def desirset(self):
    return StrictSet(self.credal)


def strong_product(model_omega, model_x):
  credal_omega, credal_x = _credal(model_omega), _credal(model_x)
  joint = Space.joint(credal_omega.space, credal_x.space)
  pairs = tuple(cartesian(credal_omega.vertices, credal_x.vertices))
  logger.debug('strong product over %s vertex pairs', len(pairs))
  return StrongProduct(joint, pairs)


@dataclass(frozen=True)
class ProductSpec:
  marginal_omega: object
  marginal_x: object
  kind: str = ProductKind.STRONG

  def __post_init__(self):
    if self.kind not in ProductKind.values:
      raise InputError(f'unknown product kind "{self.kind}"')
    object.__setattr__(self, 'kind', ProductKind(self.kind))

  def build(self):
    if self.kind == ProductKind.MARGINAL_EXTENSION:
      return irrelevant_product_set(self.marginal_omega, self.marginal_x)
    if self.kind == ProductKind.INDEPENDENT:
      return independent_natural_extension(self.marginal_omega, self.marginal_x)
    return strong_product(self.marginal_omega, self.marginal_x).desirset()

  def lower(self, f):
    if self.kind == ProductKind.MARGINAL_EXTENSION:
      conditionals = [self.marginal_x] * len(f.space.omega)
      return marginal_extension_prevision(self.marginal_omega, conditionals, f)
    if self.kind == ProductKind.STRONG:
      return strong_product(self.marginal_omega, self.marginal_x).lower(f)
    return self.build().lower_prevision(f)

# ────────────────────────────────────────────────────────────────────────────────

def a5_violation(joint_model, model_x):
  """First product V x W (V a vertex of the joint's state marginal) outside the joint credal set."""
  credal = _credal(joint_model)
  credal_x = _credal(model_x)
  for v in credal.marginal(Factor.OMEGA).vertices:
    for w in credal_x.vertices:
      candidate = LinearPrevision.product(credal.space, v, w)
      if not credal.contains(candidate):
        return candidate
  return None


def satisfies_A5(joint_model, model_x):
  return a5_violation(joint_model, model_x) is None


@dataclass(frozen=True)
class A4Verdict:
  status: str
  witness: object = None # cell index, or a (g, f) probe

  def __bool__(self):
    return self.status != A4Status.FAILS


def satisfies_A4(joint_model, probes=()):
  """
  Exact when every vertex of the joint credal set factorizes (and for a
  linear joint, where a non-factorizing cell refutes it). Otherwise the
  inequality P_(g - f) >= min_w P_(g - f^w) is checked on the probe pairs.
  """
  credal = _credal(joint_model)
  lower = LowerPrevision(joint_model)
  if credal.is_precise:
    cell = credal.vertices[0].factorizes()
    if cell is None:
      return A4Verdict(A4Status.HOLDS_EXACT)
    return A4Verdict(A4Status.FAILS, cell)
  if all(v.factorizes() is None for v in credal.vertices):
    return A4Verdict(A4Status.HOLDS_EXACT)
  if not probes:
    logger.warning('state independence check has no probes for an imprecise, non-factorizing joint')
  for g, f in probes:
    lifted = min(lower.lower(g - constant_lift(f, i)) for i in range(len(f.space.omega)))
    if lower.lower(g - f) < lifted:
      return A4Verdict(A4Status.FAILS, (g, f))
  return A4Verdict(A4Status.HOLDS_ON_PROBES)


def is_strong_product(joint_model, model_omega, model_x):
  """The joint credal set equals the hull of the vertex products, in both directions."""
  credal = _credal(joint_model)
  products = strong_product(model_omega, model_x).products
  if any(not credal.contains(p) for p in products):
    return False
  points = [p.mass for p in products]
  return all(hull_weights(points, v.mass) is not None for v in credal.vertices)
