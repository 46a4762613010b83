"""
Coherent sets of desirable gambles.

Four finite representations share one interface:

  FiniteGenerated   posi(generators + positive gambles)
  StrictSet         {f > 0 (weakly, nonzero)} + {f : P_(f) > 0} for a credal set
  AugmentedSet      posi(StrictSet + border rays), the border lying on P_ = 0
  FamilyExtension   natural extension of conditional strict models on blocks

Every query reduces to exact linear programs or to closed forms over the
vertices of a credal set. Positive membership answers carry a cone
certificate, negative ones a prevision of the model with P(f) <= 0; both
replay exactly through DesirSet.replay.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product

from django.db import models

from desirability.conf import kernel_setting
from desirability.credal import CredalSet, LinearPrevision
from desirability.exceptions import InputError, ModelError, SolverError
from desirability.numeric import ONE, ZERO, LinearProgram
from desirability.spaces import EventSet, Factor, Gamble, support

logger = logging.getLogger(__name__)

# ────────────────────────────────────────────────────────────────────────────────

class Representation(models.TextChoices):
  FG = 'fg', 'Finitely generated'
  STRICT = 'strict', 'Strict'
  AUGMENTED = 'augmented', 'Augmented'
  FAMILY = 'family', 'Conditional family'


@dataclass(frozen=True)
class CertificateTerm:
  kind: str # generator, constraint, border or block
  index: int
  gamble: Gamble
  coefficient: Fraction


@dataclass(frozen=True)
class ConeCertificate:
  """f = constant + sum(coefficient * gamble) + residual, residual >= 0."""
  terms: tuple
  constant: Fraction
  residual: Gamble

  def combination(self):
    total = self.residual.shift(self.constant)
    for term in self.terms:
      total = total + term.gamble * term.coefficient
    return total


@dataclass(frozen=True)
class SeparatingPrevision:
  prevision: LinearPrevision


@dataclass(frozen=True)
class MembershipVerdict:
  member: bool
  certificate: object = None

  def __bool__(self):
    return self.member


@dataclass(frozen=True)
class OpenSupersetVerdict:
  exists: bool
  witness: LinearPrevision = None

  def __bool__(self):
    return self.exists

# ────────────────────────────────────────────────────────────────────────────────

def _ones(space):
  return Gamble.constant(space, ONE)


def _positive_part_bound(g, d):
  """sup{mu : g - mu d >= 0}, or None when no mu works."""
  if any(dc == 0 and gc < 0 for gc, dc in zip(g.flat, d.flat)):
    return None
  return min(gc / dc for gc, dc in zip(g.flat, d.flat) if dc > 0)


def _open_part_bound(vertices, g, d):
  """sup{mu : V.(g - mu d) > 0 for every vertex V}, or None when no mu works."""
  bounds = []
  for v in vertices:
    vd, vg = v(d), v(g)
    if vd == 0:
      if vg <= 0:
        return None
    else:
      bounds.append(vg / vd)
  if not bounds:
    raise SolverError('threshold is unbounded: no vertex charges the direction gamble')
  return min(bounds)


def _best(*values):
  values = [v for v in values if v is not None]
  return max(values) if values else None


def _prevision_lp(space, constraints, strict=()):
  """max eps s.t. P in the simplex, P(h) >= 0, P(s) >= eps, eps <= 1."""
  lp = LinearProgram()
  mass = lp.variables(space.size)
  lp.add({m: ONE for m in mass}, '=', ONE)
  for h in constraints:
    lp.add(dict(zip(mass, h.flat)), '>=', ZERO)
  eps = lp.variable(lower=None, upper=ONE)
  for s in strict:
    items = list(zip(mass, s.flat)) + [(eps, -ONE)]
    lp.add(items, '>=', ZERO)
  lp.maximize({eps: ONE})
  outcome = lp.solve()
  if not outcome.is_optimal:
    return None, None
  return outcome.optimum, LinearPrevision(space, outcome.witness[:space.size])


def avoids_partial_loss(gambles):
  """
  True when no convex combination of the gambles is <= 0. Returns
  (verdict, weights) with the violating weights when it fails.
  """
  gambles = list(gambles)
  lp = LinearProgram()
  weights = lp.variables(len(gambles))
  lp.add({w: ONE for w in weights}, '=', ONE)
  if gambles:
    for c in range(gambles[0].space.size):
      lp.add({w: g.flat[c] for w, g in zip(weights, gambles)}, '<=', ZERO)
  lp.maximize({})
  outcome = lp.solve()
  if outcome.is_optimal:
    return False, outcome.witness
  return True, None

# ────────────────────────────────────────────────────────────────────────────────

class DesirSet:
  representation = None

  def __init__(self, space):
    self.space = space

  def _check(self, f):
    if f.space != self.space:
      raise InputError('gamble lives on another space than the set of desirable gambles')

  # Every representation answers these
  def member(self, f):
    raise NotImplementedError

  def threshold(self, g, d):
    """sup{mu : g - mu d in D} for d >= 0, d != 0; None when no mu works."""
    raise NotImplementedError

  def admits(self, prevision):
    """Whether the prevision is in the credal set M(D)."""
    raise NotImplementedError

  def open_superset_rows(self):
    """(model constraints, gambles needing P > 0) for the open-superset test."""
    raise NotImplementedError

  def is_strictly_desirable(self):
    raise NotImplementedError

  def is_fully_archimedean(self):
    raise NotImplementedError

  def _term_is_valid(self, term):
    return False

  @property
  def credal_set(self):
    raise NotImplementedError

  # Shared behaviour
  def _check_direction(self, g, d):
    self._check(g)
    self._check(d)
    if not d.is_positive():
      raise InputError('threshold direction must be a nonzero non-negative gamble')

  def lower_prevision(self, f):
    self._check(f)
    value = self.threshold(f, _ones(self.space))
    if value is None:
      raise SolverError('lower prevision has no feasible price')
    return value

  def upper_prevision(self, f):
    return -self.lower_prevision(-f)

  def conditional_lower_prevision(self, f, event):
    self._check(f)
    event.require_nonempty()
    return self.threshold(f.restrict(event), event.indicator())

  def _zero_verdict(self):
    _, prevision = _prevision_lp(self.space, self.open_superset_rows()[0])
    return MembershipVerdict(False, SeparatingPrevision(prevision) if prevision else None)

  def replay(self, f, verdict):
    certificate = verdict.certificate
    if verdict.member:
      if not isinstance(certificate, ConeCertificate) or f.is_zero():
        return False
      if certificate.combination() != f:
        return False
      if certificate.constant < 0 or not certificate.residual.is_nonnegative():
        return False
      uses_constraints = False
      for term in certificate.terms:
        if term.coefficient < 0 or not self._term_is_valid(term):
          return False
        uses_constraints = uses_constraints or (term.kind == 'constraint' and term.coefficient > 0)
      return certificate.constant > 0 or not uses_constraints
    if not isinstance(certificate, SeparatingPrevision):
      return False
    prevision = certificate.prevision
    return prevision(f) <= 0 and not f.is_positive() and self.admits(prevision)

  def fully_archimedean_probe(self, f):
    """sup{eps : I_S(f) (f - eps) in D} > 0."""
    indicator = support(f).indicator()
    value = self.threshold(f, indicator)
    return value is not None and value > 0

# ────────────────────────────────────────────────────────────────────────────────

class FiniteGenerated(DesirSet):
  representation = Representation.FG

  def __init__(self, space, generators=()):
    super().__init__(space)
    generators = tuple(generators)
    for g in generators:
      self._check(g)
      if g.is_zero():
        raise InputError('the zero gamble cannot be a generator')
    coherent, weights = avoids_partial_loss(generators)
    if not coherent:
      logger.warning('rejected finitely generated set: generators incur partial loss')
      raise ModelError('generators incur partial loss', witness=weights)
    self.generators = generators

  def __repr__(self):
    return f'FiniteGenerated({len(self.generators)} generators)'

  @cached_property
  def credal_set(self):
    return CredalSet(self.space, self.generators)

  def admits(self, prevision):
    return all(prevision(g) >= 0 for g in self.generators)

  def open_superset_rows(self):
    return self.generators, [g for g in self.generators if not g.is_positive()]

  def _term_is_valid(self, term):
    return term.kind == 'generator' and 0 <= term.index < len(self.generators) and self.generators[term.index] == term.gamble

  def member(self, f):
    self._check(f)
    lp = LinearProgram()
    weights = lp.variables(len(self.generators))
    for c, value in enumerate(f.flat):
      lp.add({w: g.flat[c] for w, g in zip(weights, self.generators)}, '<=', value)
    lp.maximize({})
    outcome = lp.solve()
    if outcome.is_optimal:
      if f.is_zero():
        return self._zero_verdict()
      terms = tuple(
        CertificateTerm('generator', i, g, outcome.witness[w])
        for i, (w, g) in enumerate(zip(weights, self.generators)) if outcome.witness[w] != 0
      )
      residual = f
      for term in terms:
        residual = residual - term.gamble * term.coefficient
      return MembershipVerdict(True, ConeCertificate(terms, ZERO, residual))
    mass = [-y for y in outcome.farkas]
    total = sum(mass)
    return MembershipVerdict(False, SeparatingPrevision(LinearPrevision(self.space, [m / total for m in mass])))

  def threshold(self, g, d):
    self._check_direction(g, d)
    lp = LinearProgram()
    mu = lp.variable(lower=None)
    weights = lp.variables(len(self.generators))
    for c in range(self.space.size):
      row = {w: h.flat[c] for w, h in zip(weights, self.generators)}
      row[mu] = d.flat[c]
      lp.add(row, '<=', g.flat[c])
    lp.maximize({mu: ONE})
    outcome = lp.solve()
    if outcome.is_unbounded:
      raise SolverError('threshold is unbounded on a coherent finitely generated set')
    return outcome.optimum if outcome.is_optimal else None

  def is_strictly_desirable(self):
    return all(g.is_positive() or self.lower_prevision(g) > 0 for g in self.generators)

  def is_fully_archimedean(self):
    return all(self.fully_archimedean_probe(g) for g in self.generators)

# ────────────────────────────────────────────────────────────────────────────────

class StrictSet(DesirSet):
  representation = Representation.STRICT

  def __init__(self, credal):
    super().__init__(credal.space)
    self.credal = credal

  def __repr__(self):
    return f'StrictSet({self.credal!r})'

  @property
  def credal_set(self):
    return self.credal

  def admits(self, prevision):
    return prevision.space == self.space and all(prevision(h) >= 0 for h in self.credal.constraints)

  def open_superset_rows(self):
    return self.credal.constraints, []

  def _term_is_valid(self, term):
    constraints = self.credal.constraints
    return term.kind == 'constraint' and 0 <= term.index < len(constraints) and constraints[term.index] == term.gamble

  def strict_certificate(self, f):
    """f = P_(f) + sum(lambda h) + residual, from the dual of the envelope."""
    lp = LinearProgram()
    level = lp.variable(lower=None)
    weights = lp.variables(len(self.credal.constraints))
    for c in range(self.space.size):
      row = {w: h.flat[c] for w, h in zip(weights, self.credal.constraints)}
      row[level] = ONE
      lp.add(row, '<=', f.flat[c])
    lp.maximize({level: ONE})
    outcome = lp.solve()
    if not outcome.is_optimal:
      raise SolverError('envelope dual is not optimal on a nonempty credal set')
    terms = tuple(
      CertificateTerm('constraint', i, h, outcome.witness[w])
      for i, (w, h) in enumerate(zip(weights, self.credal.constraints)) if outcome.witness[w] != 0
    )
    residual = f.shift(-outcome.optimum)
    for term in terms:
      residual = residual - term.gamble * term.coefficient
    return terms, outcome.optimum, residual

  def member(self, f):
    self._check(f)
    if f.is_zero():
      return MembershipVerdict(False, SeparatingPrevision(self.credal.vertices[0]))
    if f.is_positive():
      return MembershipVerdict(True, ConeCertificate((), ZERO, f))
    if self.credal.lower(f) > 0:
      return MembershipVerdict(True, ConeCertificate(*self.strict_certificate(f)))
    return MembershipVerdict(False, SeparatingPrevision(self.credal.argmin(f)))

  def threshold(self, g, d):
    self._check_direction(g, d)
    return _best(_positive_part_bound(g, d), _open_part_bound(self.credal.vertices, g, d))

  def is_strictly_desirable(self):
    return True

  def is_fully_archimedean(self):
    # f = I_S(f) f, so P_(f - eps I_S(f)) >= P_(f) - eps stays positive for small eps
    return True

# ────────────────────────────────────────────────────────────────────────────────

class AugmentedSet(StrictSet):
  representation = Representation.AUGMENTED

  def __init__(self, credal, border=()):
    super().__init__(credal)
    border = tuple(border)
    for b in border:
      self._check(b)
      if b.is_zero() or b.is_positive():
        raise ModelError('a border gamble must be nonzero and not positive', witness=b)
      if credal.lower(b) != 0:
        logger.warning('rejected augmented set: border gamble has lower prevision %s', credal.lower(b))
        raise ModelError('a border gamble must have lower prevision 0 under the credal set', witness=b)
    coherent, weights = avoids_partial_loss(border)
    if not coherent:
      logger.warning('rejected augmented set: border rays incur partial loss')
      raise ModelError('border gambles incur partial loss', witness=weights)
    self.border = border

  def __repr__(self):
    return f'AugmentedSet({self.credal!r}, {len(self.border)} border rays)'

  def admits(self, prevision):
    return super().admits(prevision) and all(prevision(b) >= 0 for b in self.border)

  def open_superset_rows(self):
    return self.credal.constraints, list(self.border)

  def _term_is_valid(self, term):
    if term.kind == 'border':
      return 0 <= term.index < len(self.border) and self.border[term.index] == term.gamble
    return super()._term_is_valid(term)

  def _border_terms(self, weights, witness):
    return tuple(
      CertificateTerm('border', i, b, witness[w])
      for i, (w, b) in enumerate(zip(weights, self.border)) if witness[w] != 0
    )

  def member(self, f):
    self._check(f)
    vertices = self.credal.vertices
    if f.is_zero():
      return MembershipVerdict(False, SeparatingPrevision(vertices[0]))

    # Open part: V.(f - sum mu b) >= eps for every vertex
    lp = LinearProgram()
    weights = lp.variables(len(self.border))
    eps = lp.variable(lower=None, upper=ONE)
    for v in vertices:
      row = {w: v(b) for w, b in zip(weights, self.border)}
      row[eps] = ONE
      lp.add(row, '<=', v(f))
    lp.maximize({eps: ONE})
    outcome = lp.solve()
    if outcome.is_optimal and outcome.optimum > 0:
      rays = self._border_terms(weights, outcome.witness)
      rest = f
      for term in rays:
        rest = rest - term.gamble * term.coefficient
      terms, level, residual = self.strict_certificate(rest)
      return MembershipVerdict(True, ConeCertificate(rays + terms, level, residual))

    # Positive part and bare border rays: f - sum mu b >= 0
    lp = LinearProgram()
    weights = lp.variables(len(self.border))
    for c, value in enumerate(f.flat):
      lp.add({w: b.flat[c] for w, b in zip(weights, self.border)}, '<=', value)
    lp.maximize({})
    outcome = lp.solve()
    if outcome.is_optimal:
      rays = self._border_terms(weights, outcome.witness)
      residual = f
      for term in rays:
        residual = residual - term.gamble * term.coefficient
      return MembershipVerdict(True, ConeCertificate(rays, ZERO, residual))
    return MembershipVerdict(False, SeparatingPrevision(self.credal.argmin(f)))

  def threshold(self, g, d):
    self._check_direction(g, d)
    # Border rays never raise a vertex expectation, so the open branch ignores them
    lp = LinearProgram()
    mu = lp.variable(lower=None)
    weights = lp.variables(len(self.border))
    for c in range(self.space.size):
      row = {w: b.flat[c] for w, b in zip(weights, self.border)}
      row[mu] = d.flat[c]
      lp.add(row, '<=', g.flat[c])
    lp.maximize({mu: ONE})
    outcome = lp.solve()
    if outcome.is_unbounded:
      raise SolverError('threshold is unbounded on a coherent augmented set')
    closed = outcome.optimum if outcome.is_optimal else None
    return _best(closed, _open_part_bound(self.credal.vertices, g, d))

  def is_strictly_desirable(self):
    return not self.border

  def is_fully_archimedean(self):
    return all(self.fully_archimedean_probe(b) for b in self.border)

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ConditionalBlock:
  """A conditioning event and a credal set whose vertices all live on it."""
  event: EventSet
  credal: CredalSet

  def __post_init__(self):
    self.event.require_nonempty()
    if self.credal.space != self.event.space:
      raise InputError('block credal set lives on another space than its event')
    for v in self.credal.vertices:
      if any(m != 0 for k, m in enumerate(v.mass) if k not in self.event):
        raise InputError('block credal set puts mass outside its conditioning event')

  def lower(self, f):
    return self.credal.lower(f)

  @property
  def is_vacuous(self):
    """Every strictly positive expectation on the block is already a positive gamble."""
    points = {LinearPrevision.point(self.event.space, k).mass for k in self.event}
    return {v.mass for v in self.credal.vertices} == points

  @property
  def restricted_constraints(self):
    return [h.restrict(self.event) for h in self.credal.constraints if not h.restrict(self.event).is_zero()]


class FamilyExtension(DesirSet):
  """
  Natural extension of the conditional strict models: f is desirable when
  f - sum t_j >= 0 for block gambles t_j (each supported on its event with a
  positive expectation under every vertex of its block), or f is positive.
  """
  representation = Representation.FAMILY

  def __init__(self, space, blocks=(), probes=()):
    super().__init__(space)
    self.blocks = tuple(blocks)
    for block in self.blocks:
      if block.event.space != space:
        raise InputError('block lives on another space')
    self.probes = tuple(probes)
    for f in self.probes:
      self._check(f)
    for subset in self._subsets():
      margin, _ = self._block_lp(subset)
      if margin is not None and margin > 0:
        logger.warning('rejected conditional family: blocks %s incur partial loss', subset)
        raise ModelError('conditional blocks incur partial loss', witness=subset)

  def __repr__(self):
    return f'FamilyExtension({len(self.blocks)} blocks)'

  def _subsets(self):
    for size in range(1, len(self.blocks) + 1):
      yield from combinations(range(len(self.blocks)), size)

  def _block_lp(self, subset, g=None, d=None, closed=False):
    """
    LP over block gambles t_j (j in subset) with g - mu d - sum t_j >= 0.

    Open form maximizes the margin sigma <= 1 of every block expectation
    V.t_j; closed form asks V.t_j >= 0 and maximizes mu. Without g the
    constraint reads sum t_j <= 0 (the partial-loss test).
    """
    lp = LinearProgram()
    cells = {j: {k: lp.variable(lower=None) for k in self.blocks[j].event} for j in subset}
    sigma = None if closed else lp.variable(lower=None, upper=ONE)
    mu = None if g is None else lp.variable(lower=None)
    for j in subset:
      for v in self.blocks[j].credal.vertices:
        row = [(cells[j][k], v.mass[k]) for k in cells[j]]
        if sigma is not None:
          row.append((sigma, -ONE))
        lp.add(row, '>=', ZERO)
    for c in range(self.space.size):
      row = [(cells[j][c], ONE) for j in subset if c in cells[j]]
      if mu is not None:
        row.append((mu, d.flat[c]))
      lp.add(row, '<=', ZERO if g is None else g.flat[c])
    lp.maximize({mu: ONE} if closed else {sigma: ONE})
    outcome = lp.solve()
    if outcome.is_unbounded:
      raise SolverError('block LP is unbounded on a coherent family')
    if not outcome.is_optimal:
      return None, None
    parts = {
      j: Gamble.from_flat(self.space, [outcome.witness[cells[j][k]] if k in cells[j] else ZERO for k in range(self.space.size)])
      for j in subset
    }
    return outcome.optimum, parts

  @cached_property
  def credal_set(self):
    constraints = [h for block in self.blocks for h in block.restricted_constraints]
    return CredalSet(self.space, constraints)

  def admits(self, prevision):
    return all(prevision(h) >= 0 for block in self.blocks for h in block.restricted_constraints)

  def open_superset_rows(self):
    constraints = [h for block in self.blocks for h in block.restricted_constraints]
    strict = [block.event.indicator() for block in self.blocks if not block.is_vacuous]
    return constraints, strict

  def _term_is_valid(self, term):
    if term.kind != 'block' or not 0 <= term.index < len(self.blocks):
      return False
    block = self.blocks[term.index]
    if term.gamble.restrict(block.event) != term.gamble:
      return False
    return block.lower(term.gamble) > 0

  def member(self, f):
    self._check(f)
    if f.is_zero():
      return self._zero_verdict()
    if f.is_positive():
      return MembershipVerdict(True, ConeCertificate((), ZERO, f))
    zero = Gamble.zero(self.space)
    for subset in self._subsets():
      margin, parts = self._block_lp(subset, f, zero)
      if margin is not None and margin > 0:
        terms = tuple(CertificateTerm('block', j, parts[j], ONE) for j in subset)
        residual = f
        for term in terms:
          residual = residual - term.gamble
        return MembershipVerdict(True, ConeCertificate(terms, ZERO, residual))
    if self.blocks:
      lowest = self.credal_set.argmin(f)
      if lowest(f) <= 0:
        return MembershipVerdict(False, SeparatingPrevision(lowest))
    return MembershipVerdict(False, None)

  def replay(self, f, verdict):
    if not verdict.member and verdict.certificate is None:
      return True # No separating prevision exists when every model prevision is positive on f
    return super().replay(f, verdict)

  def threshold(self, g, d):
    self._check_direction(g, d)
    best = _positive_part_bound(g, d)
    for subset in self._subsets():
      margin, _ = self._block_lp(subset, g, d)
      if margin is not None and margin > 0:
        value, _ = self._block_lp(subset, g, d, closed=True)
        best = _best(best, value)
    return best

  def is_strictly_desirable(self):
    return all(block.is_vacuous or self.lower_prevision(block.event.indicator()) > 0 for block in self.blocks)

  def is_fully_archimedean(self):
    # Natural extensions of conditional strict models on finite spaces always are
    return True

# ────────────────────────────────────────────────────────────────────────────────

class ConditionalView:
  """Membership oracle for {f in D : f = Bf}."""

  def __init__(self, desirset, event):
    if event.space != desirset.space:
      raise InputError('conditioning event lives on another space')
    self.desirset = desirset
    self.event = event.require_nonempty()
    self.space = desirset.space

  def member(self, g):
    if g.restrict(self.event) != g:
      return MembershipVerdict(False, None)
    return self.desirset.member(g)

  def generators(self):
    """Materialized generators B.g_i (finitely generated sets only)."""
    if not isinstance(self.desirset, FiniteGenerated):
      return None
    restricted = [g.restrict(self.event) for g in self.desirset.generators]
    return [g for g in restricted if not g.is_zero() and self.desirset.member(g).member]


class MarginalView:
  """Membership oracle for the keep-measurable gambles of D, on the factor space."""

  def __init__(self, desirset, keep):
    self.desirset = desirset
    self.keep = Factor(keep)
    self.space = desirset.space.factor(self.keep)

  def lift(self, g):
    if g.space != self.space:
      raise InputError('gamble does not live on the marginal factor')
    return g.cylinder(self.desirset.space)

  def member(self, g):
    return self.desirset.member(self.lift(g))

  def lower_prevision(self, g):
    return self.desirset.lower_prevision(self.lift(g))

  @property
  def credal_set(self):
    return self.desirset.credal_set.marginal(self.keep)

# ────────────────────────────────────────────────────────────────────────────────
# Module-level operations
# ────────────────────────────────────────────────────────────────────────────────

def member(desirset, f):
  return desirset.member(f)


def threshold(desirset, g, d):
  return desirset.threshold(g, d)


def condition(desirset, event):
  return ConditionalView(desirset, event)


def marginalize(desirset, keep):
  return MarginalView(desirset, keep)


def is_strictly_desirable(desirset):
  return desirset.is_strictly_desirable()


def is_fully_archimedean(desirset):
  return desirset.is_fully_archimedean()


def has_open_superset(model, space=None):
  """
  Whether some linear prevision of the model is positive on every
  non-positive generator (for a DesirSet) or on every gamble of a cone.
  """
  if isinstance(model, DesirSet):
    space = model.space
    constraints, strict = model.open_superset_rows()
  else:
    strict = list(model)
    if space is None:
      if not strict:
        raise InputError('an empty cone needs an explicit space')
      space = strict[0].space
    constraints = []
  optimum, witness = _prevision_lp(space, constraints, strict)
  if optimum is None or optimum <= 0:
    return OpenSupersetVerdict(False, None)
  return OpenSupersetVerdict(True, witness)


def check_williams_on_probes(blocks, probes):
  """
  For every nonempty set J of blocks and every assignment of probes to J,
  the sum of B_j (f_j - P_(f_j|B_j)) must reach a non-negative value on the
  union of the events.
  """
  limit = kernel_setting('WILLIAMS_PROBE_LIMIT')
  examined = 0
  for size in range(1, len(blocks) + 1):
    for subset in combinations(range(len(blocks)), size):
      union = set().union(*(blocks[j].event.cells for j in subset))
      for choice in product(range(len(probes)), repeat=size):
        examined += 1
        if examined > limit:
          logger.warning('probe check stopped after %s probe tuples', limit)
          return examined - 1
        total = [ZERO] * (len(probes[0].flat))
        for j, p in zip(subset, choice):
          block, f = blocks[j], probes[p]
          centred = f.shift(-block.lower(f)).restrict(block.event)
          total = [a + b for a, b in zip(total, centred.flat)]
        if max(total[k] for k in union) < 0:
          logger.warning('conditional family fails the probe check on blocks %s', subset)
          raise ModelError(
            'conditional family fails the regularity check on a probe',
            witness=(subset, tuple(probes[p] for p in choice)),
          )
  return examined


def build_from_conditional_family(space, family, probes=()):
  """family is a sequence of (EventSet, CredalSet) pairs."""
  blocks = [block if isinstance(block, ConditionalBlock) else ConditionalBlock(*block) for block in family]
  probes = tuple(probes)
  if probes:
    check_williams_on_probes(blocks, probes)
  return FamilyExtension(space, blocks, probes)
