import random
from fractions import Fraction as F
from io import StringIO
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import mock

from django.conf import settings as django_settings
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings
from hypothesis import strategies as st

from desirability.credal import CredalSet, LinearPrevision, enumerate_vertices
from desirability.desirsets import (AugmentedSet, ConditionalBlock, FamilyExtension, FiniteGenerated, StrictSet,
                                    avoids_partial_loss, build_from_conditional_family, condition,
                                    has_open_superset, is_fully_archimedean, is_strictly_desirable, marginalize,
                                    member)
from desirability.documents import emit_document, parse_document, parse_script
from desirability.exceptions import DocumentError, InputError, ModelError, ResourceLimitError, SolverError
from desirability.numeric import LinearProgram, LpProblem, format_rat, parse_rat, solve, verify_farkas
from desirability.previsions import (Scope, conditional_natural_extension, is_linear, lower_prevision,
                                     negative_additivity_witness, represents_complete, upper_prevision)
from desirability.runner import Runner, run
from desirability.spaces import (ActTable, EventSet, Gamble, HorseLottery, Space, decompose_in_generating_family,
                                 is_act_difference, normalize_worst_act, pi1_inverse, pi2_inverse, project_pi,
                                 support)

PROBLEMS = Path(__file__).resolve().parent / 'problems'
COIN = PROBLEMS / 'coin.txt'

COIN_SPACE = Space(('h', 't'), ('x',))
GRID = Space(('a', 'b'), ('x', 'y'))


def gamble(space, *values):
  return Gamble.from_flat(space, values)


def random_gamble(rng, space, spread=3):
  return Gamble.from_flat(space, [F(rng.randint(-spread, spread), rng.randint(1, 3)) for _ in range(space.size)])


def coin_sets():
  uniform = CredalSet.from_vertices(COIN_SPACE, [(F(1, 2), F(1, 2))])
  return StrictSet(uniform), AugmentedSet(uniform, [gamble(COIN_SPACE, -1, 1)])


def grid_models():
  credal = CredalSet.from_vertices(GRID, [(F(1, 4),) * 4, (F(1, 2), F(1, 2), 0, 0)])
  first = CredalSet.from_vertices(GRID, [(F(1, 2), F(1, 2), 0, 0), (F(1, 4), F(3, 4), 0, 0)])
  second = CredalSet.from_vertices(GRID, [(0, 0, F(1, 3), F(2, 3))])
  return [
    FiniteGenerated(GRID, [gamble(GRID, 1, -1, 0, 0), gamble(GRID, 0, 1, 0, -1)]),
    StrictSet(credal),
    AugmentedSet(credal, [gamble(GRID, 1, -1, 1, -1)]),
    build_from_conditional_family(GRID, [
      (EventSet.states(GRID, ['a']), first),
      (EventSet.states(GRID, ['b']), second),
    ]),
  ]

# ────────────────────────────────────────────────────────────────────────────────

class RationalTests(SimpleTestCase):
  def test_parse_rat_reduces_to_lowest_terms(self):
    self.assertEqual(parse_rat('-3/6'), F(-1, 2))
    self.assertEqual(parse_rat('4'), F(4))

  def test_parse_rat_rejects_floats_and_zero_denominators(self):
    for text in ('0.5', '1e3', '1/0', 'half'):
      with self.assertRaises(InputError):
        parse_rat(text)

  def test_format_rat_always_prints_a_denominator(self):
    self.assertEqual(format_rat(F(0)), '0/1')
    self.assertEqual(format_rat(F(-3)), '-3/1')
    self.assertEqual(format_rat(F(2, 4)), '1/2')


class LinearProgramTests(SimpleTestCase):
  def test_single_bound(self):
    lp = LinearProgram()
    x = lp.variable()
    lp.add({x: 1}, '<=', 3)
    lp.maximize({x: 1})
    outcome = lp.solve()
    self.assertTrue(outcome.is_optimal)
    self.assertEqual(outcome.optimum, 3)

  def test_simplex_face(self):
    lp = LinearProgram()
    x, y = lp.variables(2)
    lp.add({x: 1, y: 1}, '<=', 1)
    lp.maximize({x: 1, y: 1})
    self.assertEqual(lp.solve().optimum, 1)

  def test_equation_feasibility(self):
    lp = LinearProgram()
    a, b = lp.variables(2)
    lp.add({a: 1, b: 1}, '=', 1)
    lp.add({a: 1, b: -1}, '=', 0)
    lp.add({a: -1, b: 1}, '=', 0)
    lp.maximize({})
    outcome = lp.solve()
    self.assertTrue(outcome.is_optimal)
    self.assertEqual(outcome.witness, (F(1, 2), F(1, 2)))

  def test_infeasible_carries_a_farkas_certificate(self):
    lp = LinearProgram()
    x = lp.variable()
    lp.add({x: 1}, '>=', 2)
    lp.add({x: 1}, '<=', 1)
    lp.maximize({x: 1})
    problem = lp.problem()
    outcome = solve(problem)
    self.assertTrue(outcome.is_infeasible)
    self.assertTrue(verify_farkas(problem, outcome.farkas))
    self.assertFalse(verify_farkas(problem, (0, 0)))

  def test_unbounded(self):
    lp = LinearProgram()
    x = lp.variable()
    lp.maximize({x: 1})
    self.assertTrue(lp.solve().is_unbounded)

  def test_zero_dimension_is_optimal_at_zero(self):
    outcome = solve(LpProblem(()))
    self.assertTrue(outcome.is_optimal)
    self.assertEqual(outcome.optimum, 0)

  def test_dimension_mismatch_is_an_input_error(self):
    with self.assertRaises(InputError):
      LpProblem((1, 2), constraints=[((1,), '<=', 1)])

  @settings(max_examples=40, deadline=None)
  @given(
    st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=4),
    st.lists(st.integers(0, 4), min_size=4, max_size=4),
    st.lists(st.integers(-3, 3), min_size=3, max_size=3),
  )
  def test_strong_duality_and_exact_witnesses(self, matrix, rhs, costs):
    rows = matrix + [[1, 1, 1]]
    rhs = rhs[:len(matrix)] + [5]

    primal = LinearProgram()
    x = primal.variables(3)
    for row, b in zip(rows, rhs):
      primal.add(dict(zip(x, row)), '<=', b)
    primal.maximize(dict(zip(x, costs)))
    problem = primal.problem()
    outcome = solve(problem)
    self.assertTrue(outcome.is_optimal)
    self.assertTrue(problem.is_feasible_point(outcome.witness))
    self.assertEqual(solve(problem), outcome)

    dual = LinearProgram()
    y = dual.variables(len(rows))
    for j in range(3):
      dual.add({y[i]: rows[i][j] for i in range(len(rows))}, '>=', costs[j])
    dual.minimize(dict(zip(y, rhs)))
    self.assertEqual(dual.solve().optimum, outcome.optimum)

# ────────────────────────────────────────────────────────────────────────────────

class SpaceTests(SimpleTestCase):
  def setUp(self):
    self.space = Space(('h', 't'), ('x',), 'z')

  def test_space_rejects_worst_among_prizes(self):
    with self.assertRaises(InputError):
      Space(('w',), ('x', 'z'), 'z')

  def test_gamble_dimension_mismatch(self):
    with self.assertRaises(InputError):
      Gamble(COIN_SPACE, ((1,),))

  def test_lottery_rows_are_mass_functions(self):
    with self.assertRaises(InputError):
      HorseLottery(self.space, ((F(1, 2), F(1, 3)), (1, 0)))

  def test_project_pi_drops_the_worst_column(self):
    lottery = HorseLottery(self.space, ((F(3, 10), F(7, 10)), (1, 0)))
    self.assertEqual(project_pi(lottery.table).rows, ((F(3, 10),), (1,)))
    p = HorseLottery(self.space, ((1, 0), (1, 0)))
    q = HorseLottery(self.space, ((F(1, 2), F(1, 2)), (1, 0)))
    self.assertEqual(project_pi(p - q).rows, ((F(1, 2),), (0,)))

  def test_project_pi_needs_a_worst_outcome(self):
    with self.assertRaises(InputError):
      project_pi(ActTable(COIN_SPACE, ((1,), (0,))))

  def test_pi1_inverse(self):
    f = gamble(COIN_SPACE, F(3, 10), 0)
    lottery = pi1_inverse(f, 'z')
    self.assertEqual(lottery.masses, ((F(3, 10), F(7, 10)), (0, 1)))
    self.assertEqual(pi1_inverse(Gamble.zero(COIN_SPACE), 'z'), HorseLottery.worst_act(self.space))
    with self.assertRaises(InputError):
      pi1_inverse(gamble(COIN_SPACE, F(3, 2), 0), 'z')

  def test_pi2_inverse_rows_sum_to_zero(self):
    space = Space(('w',), ('x1', 'x2'))
    table = pi2_inverse(gamble(space, 1, -1), 'z')
    self.assertEqual(table.rows, ((1, -1, 0),))
    self.assertTrue(is_act_difference(table))

  def test_is_act_difference(self):
    space = Space(('w',), ('x1', 'x2'), 'z')
    self.assertTrue(is_act_difference(ActTable(space, ((1, -1, 0),))))
    self.assertFalse(is_act_difference(ActTable(space, ((1, -1, 1),))))
    self.assertFalse(is_act_difference(ActTable(space, ((1, 1, 1),))))

  def test_projection_inverse_pairs(self):
    rng = random.Random(4)
    for _ in range(100):
      f = Gamble.from_flat(COIN_SPACE, [F(rng.randint(0, 4), 8) for _ in range(2)])
      self.assertEqual(project_pi(pi1_inverse(f, 'z').table), f)
      g = random_gamble(rng, COIN_SPACE)
      self.assertEqual(project_pi(pi2_inverse(g, 'z')), g)

  def test_decompose_in_generating_family(self):
    space = Space(('w',), ('x1', 'x2'))
    single = decompose_in_generating_family(gamble(space, 2, -2))
    self.assertEqual(single.coefficients, ((2,),))
    space = Space(('w',), ('x1', 'x2', 'x3'))
    chain = decompose_in_generating_family(gamble(space, 1, 1, -2))
    self.assertEqual(chain.coefficients, ((1, 2),))
    self.assertEqual(chain.reconstruct(), ((1, 1, -2),))
    self.assertEqual(decompose_in_generating_family(Gamble.zero(space)).coefficients, ((0, 0),))
    with self.assertRaises(InputError):
      decompose_in_generating_family(gamble(space, 1, 0, 0))

  def test_decomposition_bound(self):
    rng = random.Random(11)
    space = Space(('w1', 'w2'), ('x1', 'x2', 'x3'))
    for _ in range(50):
      rows = []
      for _ in space.omega:
        a, b = F(rng.randint(-3, 3), 4), F(rng.randint(-3, 3), 4)
        rows.append((a, b, -a - b))
      f = Gamble(space, tuple(rows))
      decomposition = decompose_in_generating_family(f)
      self.assertEqual(decomposition.reconstruct(), f.rows)
      bound = (len(space.prizes) - 1) * max(abs(v) for v in f.flat)
      for weights in decomposition.coefficients:
        self.assertTrue(all(0 <= w <= bound for w in weights))

  def test_support(self):
    self.assertEqual(support(gamble(GRID, 0, 1, 0, -2)).cells, frozenset({1, 3}))

  def test_normalize_worst_act_swaps_per_state(self):
    w = HorseLottery(self.space, ((1, 0), (0, 1)))
    p = HorseLottery(self.space, ((F(1, 4), F(3, 4)), (1, 0)))
    mapped, permutation = normalize_worst_act([(p, w)], w)
    self.assertEqual(mapped[0][1], HorseLottery.worst_act(self.space))
    self.assertEqual(mapped[0][0].masses, ((F(3, 4), F(1, 4)), (1, 0)))
    self.assertEqual(permutation.invert(mapped[0][0]), p)
    with self.assertRaises(InputError):
      normalize_worst_act([], HorseLottery(self.space, ((F(1, 2), F(1, 2)), (0, 1))))

  def test_cylinder_and_lift(self):
    omega = GRID.factor('omega')
    lifted = gamble(omega, 1, 2).cylinder(GRID)
    self.assertEqual(lifted.flat, (1, 1, 2, 2))
    self.assertEqual(gamble(GRID, 1, 2, 3, 4).lift(1).flat, (3, 4, 3, 4))

# ────────────────────────────────────────────────────────────────────────────────

class CredalTests(SimpleTestCase):
  def test_vacuous_vertices_are_point_masses(self):
    vertices = enumerate_vertices(GRID, [])
    self.assertEqual([v.mass for v in vertices], sorted(LinearPrevision.point(GRID, k).mass for k in range(4)))

  def test_half_line_and_forced_equality(self):
    space = Space(('a', 'b'), ('x',))
    vertices = enumerate_vertices(space, [gamble(space, 1, -1)])
    self.assertEqual({v.mass for v in vertices}, {(F(1, 2), F(1, 2)), (1, 0)})
    vertices = enumerate_vertices(space, [gamble(space, 1, -1), gamble(space, -1, 1)])
    self.assertEqual([v.mass for v in vertices], [(F(1, 2), F(1, 2))])

  def test_three_vertex_example(self):
    space = Space(('1', '2', '3'), ('x',))
    constraints = [Gamble.unit(space, k).shift(F(-1, 4)) for k in range(3)]
    credal = CredalSet(space, constraints)
    self.assertEqual(len(credal.vertices), 3)
    self.assertIn((F(1, 2), F(1, 4), F(1, 4)), [v.mass for v in credal.vertices])

  def test_empty_credal_set_is_a_model_error(self):
    space = Space(('a', 'b'), ('x',))
    with self.assertRaises(ModelError):
      CredalSet(space, [gamble(space, -1, -1)])

  def test_from_vertices_prunes_interior_points(self):
    space = Space(('a', 'b'), ('x',))
    credal = CredalSet.from_vertices(space, [(1, 0), (F(1, 2), F(1, 2)), (F(3, 4), F(1, 4))])
    self.assertEqual([v.mass for v in credal.vertices], [(F(1, 2), F(1, 2)), (1, 0)])
    self.assertEqual(credal, CredalSet(space, [gamble(space, 1, -1)]))

  def test_contains_and_marginal(self):
    credal = CredalSet.from_vertices(GRID, [(F(1, 4),) * 4, (F(1, 2), F(1, 2), 0, 0)])
    self.assertTrue(credal.contains(LinearPrevision(GRID, (F(3, 8), F(3, 8), F(1, 8), F(1, 8)))))
    self.assertFalse(credal.contains(LinearPrevision.point(GRID, 0)))
    marginal = credal.marginal('omega')
    self.assertEqual([v.mass for v in marginal.vertices], [(F(1, 2), F(1, 2)), (1, 0)])

  @override_settings(CREDALKIT={'VERTEX_SUBSET_LIMIT': 2})
  def test_vertex_budget(self):
    with self.assertRaises(ResourceLimitError):
      enumerate_vertices(GRID, [])

  def test_envelope_matches_vertex_enumeration(self):
    rng = random.Random(5)
    spaces = [Space(('a', 'b'), ('x',)), GRID, Space(('a', 'b', 'c'), ('x', 'y'))]
    built = 0
    while built < 50:
      space = rng.choice(spaces)
      generators = [random_gamble(rng, space) for _ in range(rng.randint(1, 4))]
      generators = [g for g in generators if not g.is_zero()]
      try:
        desirset = FiniteGenerated(space, generators)
      except ModelError:
        continue
      built += 1
      vertices = enumerate_vertices(space, generators)
      for _ in range(10):
        f = random_gamble(rng, space)
        self.assertEqual(desirset.lower_prevision(f), min(v(f) for v in vertices))

# ────────────────────────────────────────────────────────────────────────────────

class DesirSetTests(SimpleTestCase):
  def setUp(self):
    self.space = Space(('a', 'b'), ('x',))
    self.half = FiniteGenerated(self.space, [gamble(self.space, 1, -1)])

  def test_avoids_partial_loss(self):
    self.assertTrue(avoids_partial_loss([gamble(self.space, 1, -1)])[0])
    coherent, weights = avoids_partial_loss([gamble(self.space, 1, -1), gamble(self.space, -1, 1)])
    self.assertFalse(coherent)
    self.assertEqual(tuple(weights), (F(1, 2), F(1, 2)))
    self.assertTrue(avoids_partial_loss([])[0])

  def test_incoherent_generators_are_rejected(self):
    with self.assertRaises(ModelError):
      FiniteGenerated(self.space, [gamble(self.space, 1, -1), gamble(self.space, -1, 1)])

  def test_finitely_generated_membership(self):
    verdict = member(self.half, gamble(self.space, 3, -1))
    self.assertTrue(verdict)
    self.assertTrue(verdict.certificate.residual.is_nonnegative())
    self.assertTrue(self.half.replay(gamble(self.space, 3, -1), verdict))
    refused = member(self.half, gamble(self.space, -1, 1))
    self.assertFalse(refused)
    self.assertTrue(self.half.replay(gamble(self.space, -1, 1), refused))
    self.assertFalse(member(self.half, Gamble.zero(self.space)))

  def test_finitely_generated_previsions(self):
    f = gamble(self.space, 1, 0)
    self.assertEqual(lower_prevision(self.half, f), F(1, 2))
    self.assertEqual(upper_prevision(self.half, f), 1)
    self.assertEqual(lower_prevision(self.half, Gamble.constant(self.space, 7)), 7)
    self.assertEqual(self.half.conditional_lower_prevision(f, EventSet.everything(self.space)), F(1, 2))

  def test_archimedeanity_of_finitely_generated_sets(self):
    self.assertFalse(is_strictly_desirable(self.half))
    self.assertTrue(is_strictly_desirable(FiniteGenerated(self.space, [gamble(self.space, 1, 1)])))
    self.assertFalse(is_fully_archimedean(FiniteGenerated(self.space, [gamble(self.space, 2, -1)])))

  def test_open_superset(self):
    verdict = has_open_superset(self.half)
    self.assertTrue(verdict)
    self.assertGreater(verdict.witness.mass[0], F(1, 2))
    cone = [gamble(Space(('a', 'b', 'c'), ('x',)), 1, -1, 0)]
    self.assertTrue(has_open_superset(cone))
    _, coin_augmented = coin_sets()
    self.assertFalse(has_open_superset(coin_augmented))

  def test_conditioning_and_marginalizing(self):
    view = condition(self.half, EventSet.states(self.space, ['a']))
    self.assertTrue(view.member(gamble(self.space, 1, 0)))
    self.assertFalse(view.member(gamble(self.space, 1, 1)))
    with self.assertRaises(InputError):
      condition(self.half, EventSet(self.space, ()))
    product = StrictSet(CredalSet.from_vertices(GRID, [(F(1, 4),) * 4]))
    marginal = marginalize(product, 'omega')
    self.assertFalse(marginal.member(gamble(GRID.factor('omega'), 1, -1)))
    self.assertEqual(marginal.lower_prevision(gamble(GRID.factor('omega'), 1, 0)), F(1, 2))

  def test_coin_example(self):
    strict, augmented = coin_sets()
    f = gamble(COIN_SPACE, -1, 1)
    heads, tails = EventSet.states(COIN_SPACE, ['h']), EventSet.states(COIN_SPACE, ['t'])
    for desirset in (strict, augmented):
      self.assertEqual(desirset.lower_prevision(f), 0)
      self.assertEqual(desirset.upper_prevision(f), 0)
      for probe in ((3, -2), (-1, 1), (0, 5), (F(1, 3), F(-7, 2)), (2, 2)):
        g = gamble(COIN_SPACE, *probe)
        self.assertEqual(desirset.conditional_lower_prevision(g, heads), g.flat[0])
        self.assertEqual(desirset.conditional_lower_prevision(g, tails), g.flat[1])
    self.assertFalse(strict.member(f))
    verdict = augmented.member(f)
    self.assertTrue(verdict)
    self.assertTrue(augmented.replay(f, verdict))
    self.assertTrue(strict.is_fully_archimedean())
    self.assertFalse(augmented.is_fully_archimedean())
    self.assertTrue(strict.is_strictly_desirable())
    self.assertFalse(augmented.is_strictly_desirable())

  def test_augmented_border_must_sit_on_the_boundary(self):
    strict, _ = coin_sets()
    with self.assertRaises(ModelError):
      AugmentedSet(strict.credal, [gamble(COIN_SPACE, -1, 2)])
    with self.assertRaises(ModelError):
      AugmentedSet(strict.credal, [gamble(COIN_SPACE, 1, 0)])

  def test_family_with_a_single_block_matches_the_strict_set(self):
    uniform = CredalSet.from_vertices(GRID, [(F(1, 4),) * 4])
    family = build_from_conditional_family(GRID, [(EventSet.everything(GRID), uniform)])
    strict = StrictSet(uniform)
    rng = random.Random(2)
    for _ in range(10):
      f = random_gamble(rng, GRID)
      self.assertEqual(family.member(f).member, strict.member(f).member)

  def test_family_border_of_a_block(self):
    space = Space(('1', '2', '3', '4'), ('x',))
    first = CredalSet.from_vertices(space, [(F(1, 2), F(1, 2), 0, 0)])
    second = CredalSet.from_vertices(space, [(0, 0, F(1, 2), F(1, 2))])
    family = build_from_conditional_family(space, [
      (EventSet.states(space, ['1', '2']), first),
      (EventSet.states(space, ['3', '4']), second),
    ])
    self.assertTrue(family.member(gamble(space, 1, F(-9, 10), 0, 0)))
    self.assertFalse(family.member(gamble(space, 1, -1, 0, 0)))
    self.assertTrue(family.is_fully_archimedean())

  def test_empty_family_is_vacuous(self):
    family = FamilyExtension(GRID)
    self.assertTrue(family.member(gamble(GRID, 0, 1, 0, 0)))
    self.assertFalse(family.member(gamble(GRID, 1, 1, 1, -1)))
    self.assertEqual(family.lower_prevision(gamble(GRID, 1, 2, 3, 4)), 1)

  def test_block_mass_must_stay_on_its_event(self):
    with self.assertRaises(InputError):
      ConditionalBlock(EventSet.states(GRID, ['a']), CredalSet.from_vertices(GRID, [(F(1, 4),) * 4]))

  def test_probe_check_rejects_a_sure_loss_family(self):
    uniform = CredalSet.from_vertices(GRID, [(F(1, 4),) * 4])
    corner = CredalSet.from_vertices(GRID, [(1, 0, 0, 0)])
    probes = [Gamble.unit(GRID, 0), Gamble.unit(GRID, 1)]
    with self.assertRaises(ModelError):
      build_from_conditional_family(GRID, [
        (EventSet.everything(GRID), uniform),
        (EventSet.everything(GRID), corner),
      ], probes)


class ActDifferenceConeTests(SimpleTestCase):
  def setUp(self):
    self.rng = random.Random(13)
    self.space = Space(('a', 'b'), ('x', 'y'), 'z')

  def lottery(self):
    rows = []
    for _ in self.space.omega:
      weights = [self.rng.randint(0, 3) for _ in self.space.lottery_prizes]
      weights[-1] += 1
      rows.append(tuple(F(w, sum(weights)) for w in weights))
    return HorseLottery(self.space, tuple(rows))

  def test_open_superset_matches_avoiding_partial_loss(self):
    for _ in range(50):
      cone = [random_gamble(self.rng, GRID, 2) for _ in range(self.rng.randint(1, 4))]
      cone = [g for g in cone if not g.is_zero()] or [gamble(GRID, 1, -1, 0, 0)]
      self.assertEqual(has_open_superset(cone).exists, avoids_partial_loss(cone)[0])

  def test_full_archimedeanity_matches_strict_desirability(self):
    built = 0
    while built < 50:
      generators = [project_pi(self.lottery() - self.lottery()) for _ in range(self.rng.randint(1, 3))]
      generators = [g for g in generators if not g.is_zero()]
      try:
        cone = FiniteGenerated(GRID, generators)
      except ModelError:
        continue
      built += 1
      self.assertEqual(cone.is_fully_archimedean(), cone.is_strictly_desirable())

# ────────────────────────────────────────────────────────────────────────────────

class CoherenceAxiomTests(SimpleTestCase):
  """Random gambles shared out over the four representations."""
  membership_draws = 500
  prevision_draws = 200

  def setUp(self):
    self.models = grid_models()

  def test_desirability_axioms(self):
    rng = random.Random(9)
    for model in self.models:
      self.assertFalse(model.member(Gamble.zero(GRID)))
    for i in range(self.membership_draws):
      model = self.models[i % len(self.models)]
      f, g = random_gamble(rng, GRID, 2), random_gamble(rng, GRID, 2)
      positive = Gamble.from_flat(GRID, [abs(v) for v in f.flat])
      if not positive.is_zero():
        self.assertTrue(model.member(positive))
      verdict = model.member(f)
      self.assertTrue(model.replay(f, verdict))
      if verdict:
        self.assertTrue(model.member(f * F(rng.randint(1, 5), rng.randint(1, 5))))
        if model.member(g) and not (f + g).is_zero():
          self.assertTrue(model.member(f + g))

  def test_lower_prevision_axioms(self):
    rng = random.Random(10)
    for i in range(self.prevision_draws):
      model = self.models[i % len(self.models)]
      f, g = random_gamble(rng, GRID, 2), random_gamble(rng, GRID, 2)
      low = model.lower_prevision(f)
      self.assertGreaterEqual(low, f.min())
      scale = F(rng.randint(1, 4), rng.randint(1, 4))
      self.assertEqual(model.lower_prevision(f * scale), scale * low)
      self.assertGreaterEqual(model.lower_prevision(f + g), low + model.lower_prevision(g))
      self.assertEqual(model.upper_prevision(f), -model.lower_prevision(-f))
      self.assertEqual(model.lower_prevision(f.shift(3)), low + 3)

  def test_lower_prevision_is_the_credal_envelope(self):
    rng = random.Random(12)
    for model in self.models:
      credal = model.credal_set
      for _ in range(10):
        f = random_gamble(rng, GRID)
        self.assertEqual(model.lower_prevision(f), credal.lower(f))

# ────────────────────────────────────────────────────────────────────────────────

class PrevisionTests(SimpleTestCase):
  def test_conditional_natural_extension(self):
    space = Space(('1', '2', '3'), ('x',))
    credal = CredalSet(space, [Gamble.unit(space, k).shift(F(-1, 4)) for k in range(3)])
    event = EventSet.states(space, ['1', '2'])
    self.assertEqual(conditional_natural_extension(credal, gamble(space, 1, 0, 0), event), F(1, 3))
    self.assertEqual(conditional_natural_extension(credal, event.indicator(), event), 1)

  def test_conditional_natural_extension_on_a_null_event(self):
    space = Space(('1', '2', '3'), ('x',))
    credal = CredalSet.vacuous(space)
    event = EventSet.states(space, ['2', '3'])
    self.assertEqual(conditional_natural_extension(credal, gamble(space, 9, 4, -2), event), -2)

  def test_completeness(self):
    product = CredalSet.from_vertices(GRID, [(F(1, 4),) * 4])
    for scope in Scope.values:
      self.assertTrue(represents_complete(StrictSet(product), scope))
    space = Space(('a', 'b'), ('x',))
    wide = CredalSet.from_vertices(space, [(F(1, 4), F(3, 4)), (F(1, 2), F(1, 2))])
    self.assertFalse(is_linear(wide))
    strict, _ = coin_sets()
    self.assertTrue(is_linear(strict))

  @settings(max_examples=30, deadline=None)
  @given(st.fractions(min_value=0, max_value=1, max_denominator=6), st.fractions(min_value=0, max_value=1, max_denominator=6))
  def test_negative_additivity_witness(self, p, q):
    space = Space(('a', 'b'), ('x',))
    credal = CredalSet.from_vertices(space, [(p, 1 - p), (q, 1 - q)])
    witness = negative_additivity_witness(credal)
    if p == q:
      self.assertIsNone(witness)
      return
    strict = StrictSet(credal)
    self.assertFalse(strict.member(witness.f))
    self.assertFalse(strict.member(witness.g))
    self.assertTrue(strict.member((witness.f + witness.g).shift(-witness.epsilon)))

# ────────────────────────────────────────────────────────────────────────────────

class DocumentTests(SimpleTestCase):
  def test_coin_document_round_trips_byte_identically(self):
    text = COIN.read_text(encoding='utf-8')
    document = parse_document(text)
    self.assertEqual(emit_document(document), text)
    self.assertEqual(emit_document(parse_document(emit_document(document))), text)

  def test_floats_are_rejected_with_a_position(self):
    text = 'space\n  omega h t\n  prizes x\nend\ngamble f = 0.5 | 1\n'
    with self.assertRaises(DocumentError) as caught:
      parse_document(text)
    self.assertEqual((caught.exception.line, caught.exception.column), (5, 12))

  def test_empty_gamble_table(self):
    with self.assertRaises(DocumentError):
      parse_document('space\n  omega h t\n  prizes x\nend\ngamble f =\n')

  def test_dangling_reference(self):
    with self.assertRaises(DocumentError):
      parse_document('space\n  omega h t\n  prizes x\nend\ndesirset R strict missing\nend\n')

  def test_unclosed_block(self):
    with self.assertRaises(DocumentError):
      parse_document('space\n  omega h\n  prizes x\nend\ncredal c\n  vertex 1\n')

  def test_incoherent_model_is_a_model_error(self):
    text = 'space\n  omega h t\n  prizes x\nend\ndesirset D fg\n  generator 1 | -1\n  generator -1 | 1\nend\n'
    with self.assertRaises(ModelError):
      parse_document(text)

  def test_empty_credal_set_reports_its_position(self):
    text = 'space\n  omega h t\n  prizes x\nend\ncredal c\n  constraint -1 | -1\nend\n'
    with self.assertRaises(ModelError) as caught:
      parse_document(text)
    self.assertTrue(str(caught.exception).startswith('line 5, column 8: '))

  def test_factor_declarations(self):
    text = (
      'space\n  omega a b\n  prizes x y\nend\n'
      'gamble g on omega = 1 | -1\n'
      'credal m on prizes\n  vertex 1/2 1/2\nend\n'
    )
    document = parse_document(text)
    self.assertEqual(document.gambles['g'].space, GRID.factor('omega'))
    self.assertTrue(document.credals['m'].is_precise)
    self.assertEqual(parse_document(emit_document(document)).credals['m'], document.credals['m'])


class CommandTests(SimpleTestCase):
  def call(self, *args, **options):
    out = StringIO()
    call_command('credal', *args, document=str(COIN), stdout=out, **options)
    return out.getvalue().splitlines()

  def test_lower_prevision_of_the_coin(self):
    self.assertEqual(self.call('lowprev', 'R2', 'f'), ['0/1'])
    self.assertEqual(self.call('upprev', 'R1', 'heads'), ['1/2'])
    self.assertEqual(self.call('lowprev', 'R2|H', 'heads'), ['1/1'])

  def test_membership_asymmetry(self):
    self.assertEqual(self.call('member', 'R1', 'f'), ['false'])
    self.assertEqual(self.call('member', 'R2', 'f'), ['true'])
    lines = self.call('member', 'R2', 'f', certificate=True)
    self.assertEqual(lines[0], 'true')
    self.assertTrue(lines[1].startswith('certificate constant'))

  def test_archimedean_classes(self):
    self.assertEqual(self.call('archimedean', 'vacuousRel'), ['weak-only'])
    self.assertEqual(self.call('archimedean', 'R1'), ['traditional'])
    self.assertEqual(self.call('archimedean', 'R2'), ['not-weak'])

  def test_vertices_and_interpolation(self):
    self.assertEqual(self.call('vertices', 'biased'), ['3/4 1/4'])
    lines = self.call('interpolate', 'cone', 'biased')
    self.assertIn('lower 1/4', lines)

  def test_check(self):
    out = StringIO()
    call_command('credal', 'check', str(COIN), stdout=out)
    self.assertEqual(out.getvalue().splitlines()[-1], 'ok')

  def test_input_errors_exit_with_two(self):
    with self.assertRaises(CommandError) as caught:
      self.call('lowprev', 'R2', 'nowhere')
    self.assertEqual(caught.exception.returncode, 2)
    with self.assertRaises(CommandError) as caught:
      call_command('credal', 'member', 'R1', 'f', stdout=StringIO())
    self.assertEqual(caught.exception.returncode, 2)

  def test_violated_property_exits_with_one(self):
    text = (
      'space\n  omega a b\n  prizes x y\nend\n\n'
      'credal J\n  vertex 1/2 0 | 0 1/2\nend\n'
    )
    with TemporaryDirectory() as folder:
      path = Path(folder) / 'joint.txt'
      path.write_text(text, encoding='utf-8')
      out = StringIO()
      with self.assertRaises(CommandError) as caught:
        call_command('credal', 'statecheck', 'a4', 'J', document=str(path), stdout=out)
    self.assertEqual(caught.exception.returncode, 1)
    self.assertEqual(out.getvalue().splitlines(), ['fails', 'witness a:x'])

  def test_run_is_identical_for_any_worker_count(self):
    document = parse_document(COIN.read_text(encoding='utf-8'))
    script = parse_script((PROBLEMS / 'coin.script').read_text(encoding='utf-8'))
    sequential = list(run(script, document, workers=1).lines())
    threaded = list(run(script, document, workers=4).lines())
    self.assertEqual(sequential, threaded)
    self.assertEqual(sequential[:4], ['> lowprev R1 f', '0/1', '> lowprev R2 f', '0/1'])

  def test_solver_failures_become_report_lines(self):
    document = parse_document(COIN.read_text(encoding='utf-8'))
    script = parse_script('lowprev R1 f\nupprev R1 heads\n')
    with mock.patch.object(Runner, 'lowprev', side_effect=SolverError('certificate failed its replay')):
      with self.assertLogs('desirability.runner', 'ERROR'):
        report = run(script, document, workers=2)
    lines = list(report.lines())
    self.assertEqual(lines[:2], ['> lowprev R1 f', 'internal error: certificate failed its replay'])
    self.assertEqual(lines[2:], ['> upprev R1 heads', '1/2'])
    self.assertEqual(report.status, 1)

# ────────────────────────────────────────────────────────────────────────────────

class LoggingConfigurationTests(SimpleTestCase):
  def test_trace_format_names_the_worker_thread(self):
    self.assertIn('%(threadName)s', django_settings.LOGGING['formatters']['kernel_trace']['format'])
    self.assertEqual(django_settings.LOGGING['handlers']['console']['formatter'], 'kernel_console')
    for app in ('desirability', 'preferences', 'independence'):
      self.assertIn('console', django_settings.LOGGING['loggers'][app]['handlers'])
