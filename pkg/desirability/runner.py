"""
The query commands shared by `manage.py credal` and by `run` scripts.

Each command answers with a list of report lines and a status: 0 when the
question was answered, 1 when a checked property is violated or the solver
fails. Input errors map to status 2.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from desirability.conf import kernel_setting
from desirability.desirsets import ConditionalView, DesirSet, MarginalView, SeparatingPrevision, StrictSet
from desirability.exceptions import InputError, ModelError, ResourceLimitError, SolverError
from desirability.numeric import format_rat
from desirability.previsions import conditional_natural_extension
from desirability.spaces import Factor
from independence import products
from preferences import relations

logger = logging.getLogger(__name__)

OK, VIOLATED, BAD_INPUT = 0, 1, 2

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Answer:
  lines: tuple
  status: int = OK


@dataclass(frozen=True)
class Report:
  blocks: tuple # (command, Answer)

  @property
  def status(self):
    return max((answer.status for _, answer in self.blocks), default=OK)

  def lines(self):
    for command, answer in self.blocks:
      yield f'> {command}'
      yield from answer.lines


def _prevision_line(prevision):
  return ' '.join(format_rat(m) for m in prevision.mass)


def _error_message(error):
  if isinstance(error, InputError):
    return '; '.join(error.messages)
  return str(error)

# ────────────────────────────────────────────────────────────────────────────────

class Runner:
  def __init__(self, document):
    self.document = document

  # Resolution of names and set expressions

  def model(self, expression):
    """NAME, NAME|EVENT or NAME@FACTOR; credal names read as strict sets."""
    document = self.document
    if '|' in expression:
      name, _, event = expression.partition('|')
      return ConditionalView(self.plain(name), document.event(event))
    if '@' in expression:
      name, _, factor = expression.partition('@')
      if factor not in Factor.values:
        raise InputError(f'unknown factor "{factor}"')
      return MarginalView(self.plain(name), factor)
    if expression in document.desirsets:
      return document.desirsets[expression]
    if expression in document.credals:
      return StrictSet(document.credals[expression])
    raise InputError(f'unknown set of desirable gambles "{expression}"')

  def plain(self, name):
    model = self.model(name)
    if not isinstance(model, DesirSet):
      raise InputError(f'"{name}" must name a set, not a view')
    return model

  def credal(self, expression):
    if expression in self.document.credals:
      return self.document.credals[expression]
    model = self.model(expression)
    if isinstance(model, ConditionalView):
      raise InputError('a conditioned view has no credal set to list')
    return model.credal_set

  def marginal_model(self, expression):
    """A factor model for the products: finitely generated sets stay so."""
    if '@' in expression or '|' in expression:
      return self.credal(expression)
    if expression in self.document.credals:
      return self.document.credals[expression]
    return self.model(expression)

  def gamble(self, name):
    return self.document.gamble(name)

  # Commands

  def check(self):
    lines = []
    status = OK
    for name, credal in self.document.credals.items():
      lines.append(f'{name}: {len(credal.vertices)} vertices')
    for name, desirset in self.document.desirsets.items():
      lines.append(f'{name}: coherent {desirset.representation}')
    for name, relation in self.document.relations.items():
      if relations.is_consistent(relation):
        lines.append(f'{name}: consistent')
      else:
        lines.append(f'{name}: inconsistent')
        status = VIOLATED
    lines.append('ok' if status == OK else 'violated')
    return Answer(tuple(lines), status)

  def member(self, expression, gamble, certificate=False):
    model = self.model(expression)
    g = self.gamble(gamble)
    verdict = model.member(g)
    lines = ['true' if verdict.member else 'false']
    if certificate:
      lines += self._certificate_lines(model, g, verdict)
    return Answer(tuple(lines))

  def _certificate_lines(self, model, g, verdict):
    owner = model
    if isinstance(model, MarginalView):
      owner, g = model.desirset, model.lift(g)
    elif isinstance(model, ConditionalView):
      owner = model.desirset
    certificate = verdict.certificate
    if certificate is None:
      return ['certificate none']
    if not owner.replay(g, verdict):
      raise SolverError('certificate failed its replay')
    if isinstance(certificate, SeparatingPrevision):
      return [f'certificate prevision {_prevision_line(certificate.prevision)}']
    lines = [f'certificate constant {format_rat(certificate.constant)}']
    for term in certificate.terms:
      lines.append(f'  {term.kind} {term.index} x {format_rat(term.coefficient)} : {term.gamble}')
    lines.append(f'  residual {certificate.residual}')
    return lines

  def lowprev(self, expression, gamble):
    model = self.model(expression)
    g = self.gamble(gamble)
    if isinstance(model, ConditionalView):
      value = model.desirset.conditional_lower_prevision(g, model.event)
    else:
      value = model.lower_prevision(g)
    return Answer((format_rat(value),))

  def upprev(self, expression, gamble):
    model = self.model(expression)
    g = -self.gamble(gamble)
    if isinstance(model, ConditionalView):
      value = model.desirset.conditional_lower_prevision(g, model.event)
    else:
      value = model.lower_prevision(g)
    return Answer((format_rat(-value),))

  def condlowprev(self, expression, gamble, event):
    model = self.model(expression)
    if not isinstance(model, DesirSet):
      raise InputError('conditional lower previsions take a plain set name')
    value = model.conditional_lower_prevision(self.gamble(gamble), self.document.event(event))
    return Answer((format_rat(value),))

  def condnatex(self, name, gamble, event):
    value = conditional_natural_extension(self.document.credal(name), self.gamble(gamble), self.document.event(event))
    return Answer((format_rat(value),))

  def vertices(self, expression):
    return Answer(tuple(_prevision_line(v) for v in self.credal(expression).vertices))

  def marginal(self, expression, factor):
    return self.vertices(f'{expression}@{factor}')

  def condition(self, expression, event):
    model = self.model(expression)
    if not isinstance(model, DesirSet):
      raise InputError('conditioning takes a plain set name')
    view = ConditionalView(model, self.document.event(event))
    indicator = view.event.indicator()
    lines = [
      f'event lower {format_rat(model.lower_prevision(indicator))}',
      f'event upper {format_rat(model.upper_prevision(indicator))}',
    ]
    generators = view.generators()
    if generators is not None:
      lines += [f'generator {g}' for g in generators]
    return Answer(tuple(lines))

  def pref_holds(self, expression, p, q):
    p, q = self.document.lottery(p), self.document.lottery(q)
    if expression in self.document.relations:
      verdict = relations.holds(self.document.relations[expression], p, q)
    else:
      space = self.document.space
      if space.worst is None:
        raise InputError('preferences from a set of desirable gambles need a worst outcome')
      verdict = relations.from_desirset(self.plain(expression), space.worst).holds(p, q)
    return Answer(('true' if verdict else 'false',))

  def extend_worst(self, name):
    extended = relations.extend_to_worst_outcome(self.document.relation(name))
    return Answer(tuple(f'generator {g}' for g in extended.generators))

  def archimedean(self, expression):
    if expression in self.document.relations:
      model = self.document.relations[expression]
    else:
      model = self.plain(expression)
    return Answer((str(relations.archimedean_class(model)),))

  def product(self, kind, omega, prizes):
    spec = products.ProductSpec(self.marginal_model(omega), self.marginal_model(prizes), kind)
    built = spec.build()
    return Answer(tuple(_prevision_line(v) for v in built.credal_set.vertices))

  def statecheck(self, which, joint, omega=None, prizes=None):
    if (omega is None) != (prizes is None):
      raise InputError('statecheck takes both marginals or neither')
    credal = self.credal(joint)
    model_omega = self.marginal_model(omega) if omega else credal.marginal(Factor.OMEGA)
    model_x = self.marginal_model(prizes) if prizes else credal.marginal(Factor.PRIZES)
    if which == 'a4':
      probes = [(g, f) for g in self.document.gambles.values() for f in self.document.gambles.values()
                if g.space == credal.space and f.space == credal.space]
      verdict = products.satisfies_A4(credal, probes)
      lines = [str(verdict.status)]
      if not verdict:
        witness = verdict.witness
        lines.append(f'witness {credal.space.cell_label(witness)}' if isinstance(witness, int) else f'witness {witness[0]} ; {witness[1]}')
      return Answer(tuple(lines), OK if verdict else VIOLATED)
    if which == 'a5':
      violation = products.a5_violation(credal, model_x)
      if violation is None:
        return Answer(('holds',))
      return Answer(('fails', f'witness {_prevision_line(violation)}'), VIOLATED)
    if which == 'strong':
      holds = products.is_strong_product(credal, model_omega, model_x)
      return Answer(('holds' if holds else 'fails',), OK if holds else VIOLATED)
    raise InputError(f'unknown state check "{which}"')

  def interpolate(self, cone, strict):
    cone_model = self.plain(cone)
    strict_model = self.plain(strict)
    result = relations.interpolate_strict_superset(cone_model, strict_model)
    superset = result.superset.credal
    lines = [
      f'generator {result.generator}',
      f'lower {format_rat(superset.lower(result.generator))}',
      f'inner {result.inner}',
      f'outer {result.outer}',
    ]
    lines += [f'vertex {_prevision_line(v)}' for v in superset.vertices]
    return Answer(tuple(lines))

  # Dispatch

  COMMANDS = {
    'check': ('check', 0, 0),
    'member': ('member', 2, 2),
    'lowprev': ('lowprev', 2, 2),
    'upprev': ('upprev', 2, 2),
    'condlowprev': ('condlowprev', 3, 3),
    'condnatex': ('condnatex', 3, 3),
    'vertices': ('vertices', 1, 1),
    'marginal': ('marginal', 2, 2),
    'condition': ('condition', 2, 2),
    'pref-holds': ('pref_holds', 3, 3),
    'extend-worst': ('extend_worst', 1, 1),
    'archimedean': ('archimedean', 1, 1),
    'product': ('product', 3, 3),
    'statecheck': ('statecheck', 2, 4),
    'interpolate': ('interpolate', 2, 2),
  }

  def answer(self, command):
    """Answer one command; model and input errors become report lines."""
    if command.name not in self.COMMANDS:
      return Answer((f'error: unknown command "{command.name}"',), BAD_INPUT)
    method, low, high = self.COMMANDS[command.name]
    if not low <= len(command.arguments) <= high:
      return Answer((f'error: "{command.name}" takes {low} to {high} arguments',), BAD_INPUT)
    handler = getattr(self, method)
    logger.info('answering %s', command)
    try:
      if command.name == 'member':
        return handler(*command.arguments, certificate=command.certificate)
      return handler(*command.arguments)
    except InputError as error:
      return Answer((f'error: {_error_message(error)}',), BAD_INPUT)
    except (ModelError, ResourceLimitError) as error:
      logger.warning('%s failed: %s', command, error)
      return Answer((f'violated: {error}',), VIOLATED)
    except SolverError as error:
      logger.error('%s hit a solver failure: %s', command, error)
      return Answer((f'internal error: {error}',), VIOLATED)


def run(script, document, workers=None):
  """Answers in script order whatever the worker count."""
  runner = Runner(document)
  workers = workers or kernel_setting('REPORT_WORKERS')
  commands = list(script.commands)
  if workers > 1 and len(commands) > 1:
    with ThreadPoolExecutor(max_workers=workers) as executor:
      answers = list(executor.map(runner.answer, commands))
  else:
    answers = [runner.answer(command) for command in commands]
  return Report(tuple(zip((str(c) for c in commands), answers)))
