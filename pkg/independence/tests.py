import random
from fractions import Fraction as F

from django.test import SimpleTestCase

from desirability.credal import CredalSet
from desirability.desirsets import FamilyExtension, FiniteGenerated, StrictSet, marginalize
from desirability.documents import QueryCommand, parse_document
from desirability.exceptions import InputError
from desirability.runner import Runner
from desirability.spaces import EventSet, Gamble, Space
from independence.products import (A4Status, ProductKind, ProductSpec, independent_natural_extension,
                                   irrelevant_product_set, is_irrelevant_product, is_strong_product,
                                   marginal_extension_brute_force, marginal_extension_prevision, satisfies_A4,
                                   satisfies_A5, strong_product)

JOINT = Space(('w1', 'w2'), ('x1', 'x2'))
OMEGA = JOINT.factor('omega')
PRIZES = JOINT.factor('prizes')


def gamble(space, *values):
  return Gamble.from_flat(space, values)


def random_gamble(rng, space):
  return Gamble.from_flat(space, [F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(space.size)])


def random_mass(rng, size):
  weights = [rng.randint(1, 4) for _ in range(size)]
  return tuple(F(w, sum(weights)) for w in weights)


def random_credal(rng, space, imprecise=True):
  count = rng.randint(2, 3) if imprecise else 1
  masses = [random_mass(rng, space.size) for _ in range(count)]
  return CredalSet.from_vertices(space, masses)


def interval(space, low, high):
  return CredalSet.from_vertices(space, [(low, 1 - low), (high, 1 - high)])


def linear(space, *mass):
  return CredalSet.from_vertices(space, [mass])


def transpose(f):
  space = Space(f.space.prizes, f.space.omega)
  return Gamble(space, tuple(zip(*f.rows)))

# ────────────────────────────────────────────────────────────────────────────────

class MarginalExtensionTests(SimpleTestCase):
  def setUp(self):
    self.uniform_x = linear(PRIZES, F(1, 2), F(1, 2))
    self.corner = Gamble.unit(JOINT, 0)

  def test_vacuous_state_model(self):
    value = marginal_extension_prevision(CredalSet.vacuous(OMEGA), [self.uniform_x] * 2, self.corner)
    self.assertEqual(value, 0)

  def test_uniform_state_model(self):
    value = marginal_extension_prevision(linear(OMEGA, F(1, 2), F(1, 2)), [self.uniform_x] * 2, self.corner)
    self.assertEqual(value, F(1, 4))

  def test_constants(self):
    value = marginal_extension_prevision(CredalSet.vacuous(OMEGA), [self.uniform_x] * 2, Gamble.constant(JOINT, 3))
    self.assertEqual(value, 3)

  def test_one_conditional_per_state(self):
    with self.assertRaises(InputError):
      marginal_extension_prevision(CredalSet.vacuous(OMEGA), [self.uniform_x], self.corner)

  def test_law_of_total_prevision(self):
    rng = random.Random(21)
    for _ in range(30):
      joint = Space(tuple(f'w{i}' for i in range(rng.randint(1, 3))), tuple(f'x{j}' for j in range(rng.randint(1, 3))))
      omega, prizes = joint.factor('omega'), joint.factor('prizes')
      model_omega = random_credal(rng, omega)
      conditionals = [random_credal(rng, prizes) for _ in joint.omega]
      f = random_gamble(rng, joint)
      self.assertEqual(
        marginal_extension_prevision(model_omega, conditionals, f),
        marginal_extension_brute_force(model_omega, conditionals, f),
      )

  def test_smallest_irrelevant_product_matches_marginal_extension(self):
    rng = random.Random(22)
    for _ in range(5):
      model_omega, model_x = random_credal(rng, OMEGA), random_credal(rng, PRIZES)
      spec = ProductSpec(model_omega, model_x, ProductKind.MARGINAL_EXTENSION)
      joint_set = irrelevant_product_set(model_omega, model_x)
      for _ in range(5):
        f = random_gamble(rng, JOINT)
        self.assertEqual(spec.lower(f), joint_set.lower_prevision(f))

# ────────────────────────────────────────────────────────────────────────────────

class IrrelevantProductTests(SimpleTestCase):
  def setUp(self):
    self.vacuous_omega = FiniteGenerated(OMEGA)
    self.ray = FiniteGenerated(PRIZES, [gamble(PRIZES, 1, -1)])

  def test_vacuous_marginals_give_the_positive_gambles(self):
    joint = irrelevant_product_set(self.vacuous_omega, FiniteGenerated(PRIZES))
    self.assertEqual(joint.generators, ())
    self.assertEqual(joint.lower_prevision(gamble(JOINT, 3, -1, 2, 5)), -1)

  def test_state_blocks_are_the_generators(self):
    joint = irrelevant_product_set(self.vacuous_omega, self.ray)
    self.assertEqual(set(joint.generators), {gamble(JOINT, 1, -1, 0, 0), gamble(JOINT, 0, 0, 1, -1)})
    self.assertTrue(joint.member(gamble(JOINT, 1, -1, 1, -1)))
    self.assertTrue(is_irrelevant_product(joint, self.ray))

  def test_correlated_joint_is_not_an_irrelevant_product(self):
    correlated = StrictSet(linear(JOINT, F(1, 2), 0, 0, F(1, 2)))
    self.assertFalse(is_irrelevant_product(correlated, self.ray))

  def test_uniform_product_is_an_irrelevant_product(self):
    product = StrictSet(linear(JOINT, *(F(1, 4),) * 4))
    self.assertTrue(is_irrelevant_product(product, FiniteGenerated(PRIZES, [gamble(PRIZES, 2, -1)])))

  def test_credal_state_model_keeps_the_prize_model_in_every_state(self):
    uniform_x = linear(PRIZES, F(1, 2), F(1, 2))
    joint = irrelevant_product_set(CredalSet.vacuous(OMEGA), uniform_x)
    self.assertIsInstance(joint, FamilyExtension)
    self.assertTrue(joint.member(gamble(JOINT, 1, F(-1, 2), 0, 0)))
    self.assertTrue(joint.member(gamble(JOINT, 0, 0, 1, F(-1, 2))))
    self.assertFalse(joint.member(gamble(JOINT, 1, -1, 0, 0)))
    self.assertEqual(joint.lower_prevision(gamble(JOINT, 4, -2, 1, 3)), 1)
    self.assertTrue(is_irrelevant_product(joint, uniform_x))

  def test_strict_set_of_the_block_constraints_is_not_irrelevant(self):
    uniform_x = linear(PRIZES, F(1, 2), F(1, 2))
    constraints = [
      h.cylinder(JOINT).restrict(EventSet.states(JOINT, [state]))
      for state in JOINT.omega for h in uniform_x.constraints
    ]
    collapsed = StrictSet(CredalSet(JOINT, constraints))
    self.assertFalse(collapsed.member(gamble(JOINT, 1, F(-1, 2), 0, 0)))
    self.assertFalse(is_irrelevant_product(collapsed, uniform_x))
    self.assertFalse(is_irrelevant_product(StrictSet(CredalSet.vacuous(JOINT)), uniform_x))

  def test_marginals_are_preserved(self):
    rng = random.Random(23)
    for _ in range(5):
      model_omega, model_x = random_credal(rng, OMEGA), random_credal(rng, PRIZES)
      joints = [
        irrelevant_product_set(model_omega, model_x).credal_set,
        independent_natural_extension(model_omega, model_x).credal_set,
        strong_product(model_omega, model_x).credal,
      ]
      for joint in joints:
        self.assertEqual(joint.marginal('omega'), model_omega)
        self.assertEqual(joint.marginal('prizes'), model_x)
      g = random_gamble(rng, OMEGA)
      view = marginalize(irrelevant_product_set(model_omega, model_x), 'omega')
      self.assertEqual(view.lower_prevision(g), model_omega.lower(g))

# ────────────────────────────────────────────────────────────────────────────────

class ProductTests(SimpleTestCase):
  def setUp(self):
    self.f = gamble(JOINT, 4, -2, 1, 3)

  def test_vacuous_products(self):
    vacuous = independent_natural_extension(FiniteGenerated(OMEGA), FiniteGenerated(PRIZES))
    self.assertEqual(vacuous.lower_prevision(self.f), -2)
    strong = strong_product(CredalSet.vacuous(OMEGA), CredalSet.vacuous(PRIZES))
    self.assertEqual(strong.lower(self.f), -2)

  def test_linear_strong_product_is_the_grand_mean(self):
    strong = strong_product(linear(OMEGA, F(1, 2), F(1, 2)), linear(PRIZES, F(1, 2), F(1, 2)))
    self.assertEqual(strong.lower(self.f), F(3, 2))
    self.assertEqual(strong.upper(self.f), F(3, 2))

  def test_vacuous_states_and_uniform_prizes(self):
    strong = strong_product(CredalSet.vacuous(OMEGA), linear(PRIZES, F(1, 2), F(1, 2)))
    self.assertEqual(strong.lower(self.f), 1)

  def test_strong_evaluator_matches_the_hull(self):
    rng = random.Random(24)
    for _ in range(10):
      strong = strong_product(random_credal(rng, OMEGA), random_credal(rng, PRIZES))
      f = random_gamble(rng, JOINT)
      self.assertEqual(strong.lower(f), strong.credal.lower(f))
      self.assertEqual(ProductSpec(strong.credal.marginal('omega'), strong.credal.marginal('prizes')).lower(f), strong.lower(f))

  def test_independent_extension_is_below_the_strong_product(self):
    rng = random.Random(25)
    for _ in range(4):
      model_omega, model_x = random_credal(rng, OMEGA), random_credal(rng, PRIZES)
      independent = independent_natural_extension(model_omega, model_x)
      strong = strong_product(model_omega, model_x)
      exact_x = random_credal(rng, PRIZES, imprecise=False)
      with_linear = independent_natural_extension(model_omega, exact_x)
      strong_linear = strong_product(model_omega, exact_x)
      for _ in range(5):
        f = random_gamble(rng, JOINT)
        self.assertLessEqual(independent.lower_prevision(f), strong.lower(f))
        self.assertEqual(with_linear.lower_prevision(f), strong_linear.lower(f))

  def test_independent_extension_is_symmetric(self):
    model_omega, model_x = interval(OMEGA, F(1, 4), F(3, 4)), interval(PRIZES, F(1, 3), F(1, 2))
    transposed = Space(JOINT.prizes, JOINT.omega)
    swapped_omega = CredalSet.from_vertices(transposed.factor('omega'), [v.mass for v in model_x.vertices])
    swapped_x = CredalSet.from_vertices(transposed.factor('prizes'), [v.mass for v in model_omega.vertices])
    independent = independent_natural_extension(model_omega, model_x)
    swapped = independent_natural_extension(swapped_omega, swapped_x)
    for f in (self.f, gamble(JOINT, 1, 0, 0, 1), gamble(JOINT, -1, 2, 2, -3)):
      self.assertEqual(independent.lower_prevision(f), swapped.lower_prevision(transpose(f)))

  def test_independent_extension_can_be_strictly_below(self):
    model_omega, model_x = interval(OMEGA, F(1, 4), F(3, 4)), interval(PRIZES, F(1, 4), F(3, 4))
    diagonal = gamble(JOINT, 1, 0, 0, 1)
    independent = independent_natural_extension(model_omega, model_x)
    strong = strong_product(model_omega, model_x)
    self.assertEqual(strong.lower(diagonal), F(3, 8))
    self.assertLessEqual(independent.lower_prevision(diagonal), F(1, 4))
    self.assertFalse(is_strong_product(independent.credal_set, model_omega, model_x))
    self.assertTrue(satisfies_A5(independent.credal_set, model_x))

  def test_credal_independent_extension_holds_both_conditional_models(self):
    model_omega, model_x = interval(OMEGA, F(1, 4), F(3, 4)), interval(PRIZES, F(1, 4), F(3, 4))
    independent = independent_natural_extension(model_omega, model_x)
    irrelevant = irrelevant_product_set(model_omega, model_x)
    state_block = gamble(JOINT, 1, F(-1, 4), 0, 0)
    prize_block = gamble(JOINT, 1, 0, F(-1, 4), 0)
    self.assertIsInstance(independent, FamilyExtension)
    self.assertTrue(independent.member(state_block))
    self.assertTrue(independent.member(prize_block))
    self.assertTrue(irrelevant.member(state_block))
    self.assertFalse(irrelevant.member(prize_block))
    self.assertTrue(is_irrelevant_product(independent, model_x))
    self.assertTrue(is_irrelevant_product(irrelevant, model_x))

  def test_strong_product_holds_more_than_the_independent_extension(self):
    model_omega, model_x = interval(OMEGA, F(1, 4), F(3, 4)), interval(PRIZES, F(1, 4), F(3, 4))
    independent = independent_natural_extension(model_omega, model_x)
    strong = strong_product(model_omega, model_x).desirset()
    for f in (gamble(JOINT, 1, F(-1, 4), 0, 0), gamble(JOINT, 1, 0, F(-1, 4), 0)):
      self.assertTrue(strong.member(f))
    shifted = gamble(JOINT, F(11, 16), F(-5, 16), F(-5, 16), F(11, 16))
    self.assertTrue(strong.member(shifted))
    self.assertFalse(independent.member(shifted))

  def test_product_spec_builds_every_kind(self):
    model_omega, model_x = linear(OMEGA, F(1, 3), F(2, 3)), linear(PRIZES, F(1, 2), F(1, 2))
    for kind in ProductKind.values:
      built = ProductSpec(model_omega, model_x, kind).build()
      self.assertEqual([v.mass for v in built.credal_set.vertices], [(F(1, 6), F(1, 6), F(1, 3), F(1, 3))])

  def test_product_command(self):
    document = parse_document(
      'space\n  omega w1 w2\n  prizes x1 x2\nend\n\n'
      'credal mO on omega\n  vertex 1/2 | 1/2\nend\n\n'
      'credal mX on prizes\n  vertex 1/4 3/4\nend\n'
    )
    answer = Runner(document).answer(QueryCommand('product', ('strong', 'mO', 'mX')))
    self.assertEqual(answer.lines, ('1/8 3/8 1/8 3/8',))
    answer = Runner(document).answer(QueryCommand('product', ('tensor', 'mO', 'mX')))
    self.assertEqual(answer.status, 2)

# ────────────────────────────────────────────────────────────────────────────────

class StateIndependenceTests(SimpleTestCase):
  def setUp(self):
    self.correlated = linear(JOINT, F(1, 2), 0, 0, F(1, 2))
    self.product = linear(JOINT, F(1, 8), F(3, 8), F(1, 8), F(3, 8))

  def test_strong_products_satisfy_both_characterizations(self):
    rng = random.Random(26)
    for shape in ((2, 2), (3, 2)):
      joint = Space(tuple(f'w{i}' for i in range(shape[0])), tuple(f'x{j}' for j in range(shape[1])))
      for _ in range(3):
        model_omega = random_credal(rng, joint.factor('omega'))
        model_x = random_credal(rng, joint.factor('prizes'))
        credal = strong_product(model_omega, model_x).credal
        self.assertTrue(satisfies_A5(credal, model_x))
        self.assertTrue(is_strong_product(credal, model_omega, model_x))
        self.assertEqual(satisfies_A4(credal).status, A4Status.HOLDS_EXACT)

  def test_correlated_mass_fails_with_a_cell_witness(self):
    verdict = satisfies_A4(self.correlated)
    self.assertFalse(verdict)
    self.assertEqual(verdict.witness, 0)
    self.assertFalse(satisfies_A5(self.correlated, self.correlated.marginal('prizes')))
    self.assertFalse(is_strong_product(
      self.correlated, self.correlated.marginal('omega'), self.correlated.marginal('prizes'),
    ))

  def test_linear_product_is_the_strong_product_of_its_marginals(self):
    self.assertTrue(is_strong_product(self.product, self.product.marginal('omega'), self.product.marginal('prizes')))
    self.assertEqual(satisfies_A4(self.product).status, A4Status.HOLDS_EXACT)

  def test_three_way_equivalence_on_linear_previsions(self):
    rng = random.Random(27)
    weight = rng.choice((F(1, 3), F(1, 2), F(2, 3)))
    mixture = [weight * a + (1 - weight) * b for a, b in zip(self.product.vertices[0].mass, self.correlated.vertices[0].mass)]
    for credal in (self.product, self.correlated, linear(JOINT, *mixture)):
      factorizes = credal.vertices[0].factorizes() is None
      self.assertEqual(satisfies_A5(credal, credal.marginal('prizes')), factorizes)
      self.assertEqual(bool(satisfies_A4(credal)), factorizes)

  def test_imprecise_joint_without_probes_is_only_probe_checked(self):
    joint = CredalSet.from_vertices(JOINT, [(F(1, 4),) * 4, (F(1, 2), 0, 0, F(1, 2))])
    with self.assertLogs('independence.products', 'WARNING'):
      verdict = satisfies_A4(joint)
    self.assertEqual(verdict.status, A4Status.HOLDS_ON_PROBES)
