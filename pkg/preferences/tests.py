import random
from fractions import Fraction as F

from django.test import SimpleTestCase

from desirability.credal import CredalSet
from desirability.desirsets import AugmentedSet, FiniteGenerated, StrictSet
from desirability.exceptions import InputError, ModelError
from desirability.spaces import Gamble, HorseLottery, Space, pi1_inverse, pi2_inverse, project_pi
from preferences.relations import (ArchimedeanClass, PreferenceRelation, archimedean_class, dominates,
                                   extend_to_worst_outcome, from_desirset, holds, interpolate_strict_superset,
                                   is_consistent, to_desirset)


def lottery(space, *rows):
  return HorseLottery(space, rows)


def random_lottery(rng, space):
  rows = []
  for _ in space.omega:
    weights = [rng.randint(0, 3) for _ in space.lottery_prizes]
    if not any(weights):
      weights[rng.randrange(len(weights))] = 1
    total = sum(weights)
    rows.append(tuple(F(w, total) for w in weights))
  return HorseLottery(space, tuple(rows))


def random_space(rng, worst='z', min_prizes=1):
  omega = tuple(f'w{i}' for i in range(rng.randint(1, 3)))
  prizes = tuple(f'x{j}' for j in range(rng.randint(min_prizes, 3)))
  return Space(omega, prizes, worst)


def random_relation(rng, space, pairs):
  """A consistent relation with up to `pairs` asserted pairs, or None."""
  asserted = []
  for _ in range(pairs):
    p, q = random_lottery(rng, space), random_lottery(rng, space)
    if p != q:
      asserted.append((p, q))
  relation = PreferenceRelation(space, asserted)
  return relation if is_consistent(relation) else None


class RelationTests(SimpleTestCase):
  def setUp(self):
    self.space = Space(('w',), ('x1', 'x2'), 'z')
    self.p = lottery(self.space, (1, 0, 0))
    self.q = lottery(self.space, (0, 1, 0))
    self.z = HorseLottery.worst_act(self.space)

  def test_irreflexive_pairs_are_rejected(self):
    with self.assertRaises(InputError):
      PreferenceRelation(self.space, [(self.p, self.p)])

  def test_consistency(self):
    self.assertTrue(is_consistent(PreferenceRelation(self.space)))
    self.assertTrue(is_consistent(PreferenceRelation(self.space, [(self.p, self.q)])))
    self.assertFalse(is_consistent(PreferenceRelation(self.space, [(self.p, self.q), (self.q, self.p)])))

  def test_bare_ray_relation_is_consistent(self):
    bare = Space(('w',), ('x1', 'x2'))
    p, q = lottery(bare, (1, 0)), lottery(bare, (0, 1))
    self.assertTrue(is_consistent(PreferenceRelation(bare, [(p, q)])))
    self.assertFalse(is_consistent(PreferenceRelation(bare, [(p, q), (q, p)])))

  def test_holds(self):
    relation = PreferenceRelation(self.space, [(self.p, self.q)])
    self.assertTrue(holds(relation, self.p, self.z))
    self.assertTrue(holds(relation, self.p, self.q))
    half_p = lottery(self.space, (F(1, 2), 0, F(1, 2)))
    half_q = lottery(self.space, (0, F(1, 2), F(1, 2)))
    self.assertTrue(holds(relation, half_p, half_q))
    self.assertFalse(holds(relation, self.q, self.p))

  def test_holds_on_an_inconsistent_relation(self):
    relation = PreferenceRelation(self.space, [(self.p, self.q), (self.q, self.p)])
    with self.assertRaises(ModelError):
      holds(relation, self.p, self.z)

  def test_dominates(self):
    self.assertTrue(dominates(self.p, self.z))
    self.assertFalse(dominates(self.p, self.p))
    single = Space(('w',), ('x',), 'z')
    self.assertTrue(dominates(lottery(single, (1, 0)), lottery(single, (F(1, 2), F(1, 2)))))

  def test_from_worst_act_moves_the_worst_act_onto_z(self):
    w = lottery(self.space, (0, 1, 0))
    relation, permutation = PreferenceRelation.from_worst_act([(self.p, w)], w)
    self.assertFalse(permutation.is_identity)
    self.assertEqual(relation.pairs[0][1], lottery(self.space, (0, 0, 1)))
    self.assertTrue(holds(relation, *relation.pairs[0]))


class DesirabilityTranslationTests(SimpleTestCase):
  def test_empty_relation_is_dominance(self):
    rng = random.Random(1)
    space = Space(('a', 'b'), ('x',), 'z')
    vacuous = to_desirset(PreferenceRelation(space))
    self.assertEqual(vacuous.generators, ())
    oracle = from_desirset(vacuous, 'z')
    for _ in range(40):
      p, q = random_lottery(rng, space), random_lottery(rng, space)
      self.assertEqual(oracle.holds(p, q), dominates(p, q))

  def test_strict_set_oracle(self):
    rng = random.Random(2)
    coin = Space(('h', 't'), ('x',))
    uniform = StrictSet(CredalSet.from_vertices(coin, [(F(1, 2), F(1, 2))]))
    oracle = from_desirset(uniform, 'z')
    space = Space(('h', 't'), ('x',), 'z')
    for _ in range(5):
      p, q = random_lottery(rng, space), random_lottery(rng, space)
      expected = sum(project_pi(p - q).flat) > 0
      self.assertEqual(oracle.holds(p, q), expected)

  def test_worst_outcome_clash(self):
    coin = Space(('h', 't'), ('x',))
    with self.assertRaises(InputError):
      from_desirset(FiniteGenerated(coin), 'x')

  def test_round_trip(self):
    rng = random.Random(3)
    checked = 0
    while checked < 50:
      space = random_space(rng)
      relation = random_relation(rng, space, rng.randint(1, 4))
      if relation is None:
        continue
      checked += 1
      oracle = from_desirset(to_desirset(relation), 'z')
      for _ in range(20):
        p, q = random_lottery(rng, space), random_lottery(rng, space)
        self.assertEqual(oracle.holds(p, q), holds(relation, p, q))

  def test_projection_identities(self):
    rng = random.Random(4)
    for _ in range(100):
      space = random_space(rng)
      p, q = random_lottery(rng, space), random_lottery(rng, space)
      self.assertEqual(pi1_inverse(project_pi(p.table), 'z'), p)
      self.assertEqual(pi2_inverse(project_pi(p - q), 'z'), p - q)


class ClosureAxiomTests(SimpleTestCase):
  """Strict partial order and mixture independence of the cone closure."""

  def setUp(self):
    rng = random.Random(5)
    self.cases = []
    while len(self.cases) < 10:
      space = random_space(rng)
      relation = random_relation(rng, space, rng.randint(1, 3))
      if relation is not None:
        self.cases.append(relation)

  def test_strict_partial_order(self):
    rng = random.Random(6)
    for relation in self.cases:
      space = relation.space
      for _ in range(20):
        p, q, r = (random_lottery(rng, space) for _ in range(3))
        self.assertFalse(holds(relation, p, p))
        if holds(relation, p, q) and holds(relation, q, r):
          self.assertTrue(holds(relation, p, r))

  def test_mixture_independence(self):
    rng = random.Random(7)
    for relation in self.cases:
      space = relation.space
      for _ in range(20):
        p, q, r = (random_lottery(rng, space) for _ in range(3))
        alpha = rng.choice((F(1, 4), F(1)))
        self.assertEqual(holds(relation, p.mix(r, alpha), q.mix(r, alpha)), holds(relation, p, q))

  def test_dominance_implies_preference(self):
    rng = random.Random(8)
    for relation in self.cases:
      for _ in range(20):
        p, q = random_lottery(rng, relation.space), random_lottery(rng, relation.space)
        if dominates(p, q):
          self.assertTrue(holds(relation, p, q))

# ────────────────────────────────────────────────────────────────────────────────

class ArchimedeanTests(SimpleTestCase):
  def test_vacuous_grid(self):
    for states in (1, 2, 3):
      for prizes in (1, 2, 3):
        space = Space(tuple(f'w{i}' for i in range(states)), tuple(f'x{j}' for j in range(prizes)), 'z')
        klass = archimedean_class(PreferenceRelation(space))
        expected = ArchimedeanClass.TRADITIONAL if states == prizes == 1 else ArchimedeanClass.WEAK_ONLY
        self.assertEqual(klass, expected, (states, prizes))
        self.assertTrue(to_desirset(PreferenceRelation(space)).is_strictly_desirable())

  def test_relation_from_an_everywhere_positive_strict_set(self):
    space = Space(('a', 'b'), ('x', 'y'))
    strict = StrictSet(CredalSet.from_vertices(space, [(F(1, 8), F(3, 8), F(1, 4), F(1, 4))]))
    self.assertEqual(archimedean_class(strict), ArchimedeanClass.TRADITIONAL)

  def test_extension_of_bare_relations(self):
    rng = random.Random(9)
    checked = 0
    while checked < 20:
      space = random_space(rng, worst=None, min_prizes=2)
      relation = random_relation(rng, space, rng.randint(1, 4))
      if relation is None:
        continue
      checked += 1
      extended = extend_to_worst_outcome(relation)
      for g in extended.generators:
        self.assertEqual(extended.lower_prevision(g), 0)
      expected = ArchimedeanClass.NOT_WEAK if relation.pairs else ArchimedeanClass.WEAK_ONLY
      self.assertEqual(archimedean_class(relation), expected)
      self.assertEqual(archimedean_class(relation) != ArchimedeanClass.NOT_WEAK, extended.is_strictly_desirable())

  def test_extension_of_the_empty_and_single_ray_relations(self):
    bare = Space(('w',), ('x1', 'x2'))
    self.assertEqual(extend_to_worst_outcome(PreferenceRelation(bare)).generators, ())
    p, q = lottery(bare, (1, 0)), lottery(bare, (0, 1))
    extended = extend_to_worst_outcome(PreferenceRelation(bare, [(p, q)]))
    self.assertEqual(extended.generators, (Gamble(bare, ((1, -1),)),))
    with self.assertRaises(InputError):
      extend_to_worst_outcome(PreferenceRelation(Space(('w',), ('x',), 'z')))


class InterpolationTests(SimpleTestCase):
  def setUp(self):
    self.space = Space(('h', 't'), ('x',))
    self.f = Gamble(self.space, ((1,), (-1,)))
    self.cone = FiniteGenerated(self.space, [self.f])
    self.biased = StrictSet(CredalSet.from_vertices(self.space, [(F(3, 4), F(1, 4))]))

  def test_halves_the_lower_prevision_each_time(self):
    first = interpolate_strict_superset(self.cone, self.biased)
    self.assertEqual(first.superset.lower_prevision(self.f), F(1, 4))
    second = interpolate_strict_superset(self.cone, first.superset)
    self.assertEqual(second.superset.lower_prevision(self.f), F(1, 8))

  def test_strict_double_inclusion(self):
    result = interpolate_strict_superset(self.cone, self.biased)
    self.assertTrue(result.superset.member(result.inner))
    self.assertFalse(self.cone.member(result.inner))
    self.assertTrue(self.biased.member(result.outer))
    self.assertFalse(result.superset.member(result.outer))

  def test_empty_cone_is_rejected(self):
    with self.assertRaises(ModelError):
      interpolate_strict_superset(FiniteGenerated(self.space), self.biased)

  def test_strict_set_must_include_the_cone(self):
    uniform = StrictSet(CredalSet.from_vertices(self.space, [(F(1, 2), F(1, 2))]))
    with self.assertRaises(ModelError):
      interpolate_strict_superset(self.cone, uniform)

  def test_border_rays_are_rejected(self):
    augmented = AugmentedSet(CredalSet.from_vertices(self.space, [(F(1, 2), F(1, 2))]), [self.f])
    with self.assertRaises(InputError):
      interpolate_strict_superset(self.cone, augmented)
