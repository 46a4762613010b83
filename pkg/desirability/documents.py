"""
Problem documents and query scripts.

A document is a flat text file: a `space ... end` block, one-line gamble,
lottery and event statements, and `credal`, `desirset` and `relation`
blocks closed by `end`. Table rows are separated by `|`, entries are
integers or p/q. `#` starts a comment. Names are unique across the whole
document and a name must be declared before it is referenced.

emit_document writes the canonical form; parsing it again gives the same
document.
"""
import logging
import re
from dataclasses import dataclass, field

from desirability.credal import CredalSet
from desirability.desirsets import (AugmentedSet, FiniteGenerated, Representation, StrictSet,
                                    build_from_conditional_family)
from desirability.exceptions import DocumentError, InputError, ModelError, ResourceLimitError
from desirability.numeric import parse_rat
from desirability.spaces import EventSet, Factor, Gamble, HorseLottery, Space
from preferences.relations import PreferenceRelation

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r'\||[^\s|#]+')
_NAME = re.compile(r'^[A-Za-z_][A-Za-z0-9_.-]*$')

RESERVED = {'space', 'end', 'gamble', 'lottery', 'event', 'credal', 'desirset', 'relation', 'on'}

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Token:
  text: str
  line: int
  column: int

  def fail(self, message):
    return DocumentError(message, self.line, self.column)

  def locate(self, message):
    return f'line {self.line}, column {self.column}: {message}'


def _tokenize(text):
  """Non-empty lines as token lists, comments stripped."""
  lines = []
  for number, raw in enumerate(text.splitlines(), start=1):
    code = raw.split('#', 1)[0]
    tokens = [Token(m.group(), number, m.start() + 1) for m in _TOKEN.finditer(code)]
    if tokens:
      lines.append(tokens)
  return lines


def _rat(token):
  try:
    return parse_rat(token.text)
  except InputError as error:
    raise token.fail(error.messages[0])


def _rows(tokens):
  rows, row = [], []
  for token in tokens:
    if token.text == '|':
      rows.append(tuple(row))
      row = []
    else:
      row.append(_rat(token))
  if row or rows:
    rows.append(tuple(row))
  return tuple(rows)


def _table(tokens):
  return ' | '.join(' '.join(str(v) for v in row) for row in tokens)

# ────────────────────────────────────────────────────────────────────────────────

@dataclass
class CredalDeclaration:
  factor: str = None
  constraints: list = field(default_factory=list)
  vertices: list = field(default_factory=list)


@dataclass
class DesirsetDeclaration:
  kind: str
  factor: str = None
  credal: str = None
  generators: list = field(default_factory=list)
  border: list = field(default_factory=list)
  blocks: list = field(default_factory=list) # (event name, credal name)
  probes: list = field(default_factory=list) # gamble names


@dataclass
class ProblemDocument:
  space: Space
  gambles: dict = field(default_factory=dict)
  lotteries: dict = field(default_factory=dict)
  events: dict = field(default_factory=dict)
  credals: dict = field(default_factory=dict)
  desirsets: dict = field(default_factory=dict)
  relations: dict = field(default_factory=dict)
  declarations: dict = field(default_factory=dict)

  @property
  def gamble_space(self):
    return self.space.without_worst()

  def names(self):
    return set(self.declarations)

  def _lookup(self, table, name, what):
    if name not in table:
      raise InputError(f'unknown {what} "{name}"')
    return table[name]

  def gamble(self, name):
    return self._lookup(self.gambles, name, 'gamble')

  def lottery(self, name):
    return self._lookup(self.lotteries, name, 'lottery')

  def event(self, name):
    return self._lookup(self.events, name, 'event')

  def credal(self, name):
    return self._lookup(self.credals, name, 'credal set')

  def desirset(self, name):
    return self._lookup(self.desirsets, name, 'set of desirable gambles')

  def relation(self, name):
    return self._lookup(self.relations, name, 'relation')

# ────────────────────────────────────────────────────────────────────────────────

class _Parser:
  def __init__(self, text):
    self.lines = _tokenize(text)
    self.position = 0
    self.document = None

  def next_line(self):
    if self.position >= len(self.lines):
      return None
    line = self.lines[self.position]
    self.position += 1
    return line

  def block_body(self, opener):
    """Lines up to the matching `end`."""
    body = []
    while True:
      line = self.next_line()
      if line is None:
        raise opener.fail(f'"{opener.text}" block is never closed with "end"')
      if line[0].text == 'end':
        if len(line) > 1:
          raise line[1].fail('unexpected text after "end"')
        return body
      body.append(line)

  def new_name(self, token):
    if not _NAME.match(token.text) or token.text in RESERVED:
      raise token.fail(f'"{token.text}" is not a valid name')
    if token.text in self.document.declarations:
      raise token.fail(f'name "{token.text}" is already declared')
    return token.text

  def reference(self, token, table, what):
    if token.text not in table:
      raise token.fail(f'unknown {what} "{token.text}"')
    return table[token.text]

  def factor_space(self, line, index):
    """The space of an optional `on omega|prizes` suffix starting at index."""
    if len(line) <= index:
      return None, self.document.gamble_space
    if line[index].text != 'on' or len(line) != index + 2:
      raise line[index].fail('expected "on omega" or "on prizes"')
    token = line[index + 1]
    if token.text not in Factor.values:
      raise token.fail(f'unknown factor "{token.text}"')
    return token.text, self.document.gamble_space.factor(token.text)

  def build(self, token, constructor, *args):
    try:
      return constructor(*args)
    except InputError as error:
      raise token.fail(error.messages[0])
    except ModelError as error:
      raise ModelError(token.locate(error), witness=error.witness) from error
    except ResourceLimitError as error:
      raise ResourceLimitError(token.locate(error)) from error

  # Statements

  def parse(self):
    first = self.next_line()
    if first is None or first[0].text != 'space':
      token = first[0] if first else Token('', 1, 1)
      raise token.fail('a document starts with a "space" block')
    self.space_block(first)
    handlers = {
      'gamble': self.gamble,
      'lottery': self.lottery,
      'event': self.event,
      'credal': self.credal,
      'desirset': self.desirset,
      'relation': self.relation,
    }
    while True:
      line = self.next_line()
      if line is None:
        break
      handler = handlers.get(line[0].text)
      if handler is None:
        raise line[0].fail(f'unknown statement "{line[0].text}"')
      handler(line)
    return self.document

  def space_block(self, opener):
    if len(opener) > 1:
      raise opener[1].fail('unexpected text after "space"')
    fields = {}
    for line in self.block_body(opener[0]):
      key = line[0].text
      if key not in ('omega', 'prizes', 'worst'):
        raise line[0].fail(f'unknown space field "{key}"')
      if key in fields:
        raise line[0].fail(f'space field "{key}" given twice')
      if key == 'worst' and len(line) != 2:
        raise line[0].fail('"worst" takes exactly one label')
      fields[key] = [t.text for t in line[1:]]
    for key in ('omega', 'prizes'):
      if key not in fields:
        raise opener[0].fail(f'space block needs "{key}"')
    worst = fields['worst'][0] if 'worst' in fields else None
    space = self.build(opener[0], Space, fields['omega'], fields['prizes'], worst)
    self.document = ProblemDocument(space)

  def _equals(self, line, index):
    if len(line) <= index or line[index].text != '=':
      token = line[index] if len(line) > index else line[-1]
      raise token.fail('expected "="')
    return line[index + 1:]

  def gamble(self, line):
    if len(line) < 2:
      raise line[0].fail('gamble needs a name')
    name = self.new_name(line[1])
    split = next((k for k, t in enumerate(line) if t.text == '='), len(line))
    factor, space = self.factor_space(line[:split], 2)
    rows = _rows(self._equals(line, split))
    self.document.gambles[name] = self.build(line[1], Gamble, space, rows)
    self.document.declarations[name] = factor

  def lottery(self, line):
    if len(line) < 2:
      raise line[0].fail('lottery needs a name')
    name = self.new_name(line[1])
    rows = _rows(self._equals(line, 2))
    self.document.lotteries[name] = self.build(line[1], HorseLottery, self.document.space, rows)
    self.document.declarations[name] = None

  def event(self, line):
    if len(line) < 2:
      raise line[0].fail('event needs a name')
    name = self.new_name(line[1])
    labels = self._equals(line, 2)
    space = self.document.gamble_space
    if not labels:
      raise line[1].fail('an event needs at least one state or cell')
    if all(':' in t.text for t in labels):
      cells = []
      for token in labels:
        state, _, prize = token.text.partition(':')
        i = self.build(token, space.state_index, state)
        j = self.build(token, space.prize_index, prize)
        cells.append(space.cell(i, j))
      event = EventSet(space, cells)
    elif any(':' in t.text for t in labels):
      raise labels[0].fail('an event lists either states or cells, not both')
    else:
      event = self.build(labels[0], EventSet.states, space, [t.text for t in labels])
    self.document.events[name] = event
    self.document.declarations[name] = None

  def credal(self, line):
    if len(line) < 2:
      raise line[0].fail('credal needs a name')
    name = self.new_name(line[1])
    factor, space = self.factor_space(line, 2)
    declaration = CredalDeclaration(factor)
    for row in self.block_body(line[0]):
      kind = row[0].text
      if kind not in ('constraint', 'vertex'):
        raise row[0].fail(f'unknown credal row "{kind}"')
      gamble = self.build(row[0], Gamble, space, _rows(row[1:]))
      (declaration.constraints if kind == 'constraint' else declaration.vertices).append(gamble)
    if declaration.constraints and declaration.vertices:
      raise line[1].fail('a credal set is given by constraints or by vertices, not both')
    if declaration.vertices:
      credal = self.build(line[1], CredalSet.from_vertices, space, [v.flat for v in declaration.vertices])
    else:
      credal = self.build(line[1], CredalSet, space, declaration.constraints)
    self.document.credals[name] = credal
    self.document.declarations[name] = declaration

  def desirset(self, line):
    if len(line) < 3:
      raise line[0].fail('desirset needs a name and a representation')
    name = self.new_name(line[1])
    kind_token = line[2]
    if kind_token.text not in Representation.values:
      raise kind_token.fail(f'unknown representation "{kind_token.text}"')
    kind = Representation(kind_token.text)
    declaration = DesirsetDeclaration(kind)
    if kind in (Representation.STRICT, Representation.AUGMENTED):
      if len(line) != 4:
        raise kind_token.fail(f'"{kind}" takes the name of a credal set')
      credal = self.reference(line[3], self.document.credals, 'credal set')
      declaration.credal = line[3].text
      space = credal.space
    elif kind == Representation.FG:
      declaration.factor, space = self.factor_space(line, 3)
    else:
      if len(line) != 3:
        raise line[3].fail('unexpected text after "family"')
      space = self.document.gamble_space

    allowed = {
      Representation.FG: {'generator'},
      Representation.STRICT: set(),
      Representation.AUGMENTED: {'border'},
      Representation.FAMILY: {'block', 'probe'},
    }[kind]
    for row in self.block_body(line[0]):
      key = row[0].text
      if key not in allowed:
        raise row[0].fail(f'"{key}" rows are not allowed in a {kind} set')
      if key in ('generator', 'border'):
        gamble = self.build(row[0], Gamble, space, _rows(row[1:]))
        (declaration.generators if key == 'generator' else declaration.border).append(gamble)
      elif key == 'block':
        if len(row) != 3:
          raise row[0].fail('"block" takes an event and a credal set')
        self.reference(row[1], self.document.events, 'event')
        self.reference(row[2], self.document.credals, 'credal set')
        declaration.blocks.append((row[1].text, row[2].text))
      else:
        if len(row) != 2:
          raise row[0].fail('"probe" takes a gamble name')
        self.reference(row[1], self.document.gambles, 'gamble')
        declaration.probes.append(row[1].text)

    self.document.desirsets[name] = self.build(line[1], self._construct, declaration, space)
    self.document.declarations[name] = declaration

  def _construct(self, declaration, space):
    document = self.document
    if declaration.kind == Representation.FG:
      return FiniteGenerated(space, declaration.generators)
    if declaration.kind == Representation.STRICT:
      return StrictSet(document.credals[declaration.credal])
    if declaration.kind == Representation.AUGMENTED:
      return AugmentedSet(document.credals[declaration.credal], declaration.border)
    family = [(document.events[e], document.credals[c]) for e, c in declaration.blocks]
    probes = [document.gambles[g] for g in declaration.probes]
    return build_from_conditional_family(space, family, probes)

  def relation(self, line):
    if len(line) != 2:
      raise line[0].fail('relation takes exactly a name')
    name = self.new_name(line[1])
    pairs, names = [], []
    for row in self.block_body(line[0]):
      if row[0].text != 'prefer' or len(row) != 3:
        raise row[0].fail('relation rows read "prefer P Q"')
      p = self.reference(row[1], self.document.lotteries, 'lottery')
      q = self.reference(row[2], self.document.lotteries, 'lottery')
      pairs.append((p, q))
      names.append((row[1].text, row[2].text))
    self.document.relations[name] = self.build(line[1], PreferenceRelation, self.document.space, pairs)
    self.document.declarations[name] = names


def parse_document(text):
  document = _Parser(text).parse()
  logger.debug('parsed document with %s declarations', len(document.declarations))
  return document

# ────────────────────────────────────────────────────────────────────────────────

def _factor_suffix(factor):
  return f' on {factor}' if factor else ''


def emit_document(document):
  space = document.space
  chunks = []
  lines = ['space', f'  omega {" ".join(space.omega)}', f'  prizes {" ".join(space.prizes)}']
  if space.worst is not None:
    lines.append(f'  worst {space.worst}')
  lines.append('end')
  chunks.append('\n'.join(lines))

  simple = [
    f'gamble {name}{_factor_suffix(document.declarations[name])} = {_table(g.rows)}'
    for name, g in document.gambles.items()
  ]
  if simple:
    chunks.append('\n'.join(simple))
  simple = [f'lottery {name} = {_table(p.masses)}' for name, p in document.lotteries.items()]
  if simple:
    chunks.append('\n'.join(simple))
  simple = []
  for name, event in document.events.items():
    if event.is_cylinder:
      states = sorted({k // len(event.space.prizes) for k in event})
      simple.append(f'event {name} = {" ".join(event.space.omega[i] for i in states)}')
    else:
      simple.append(f'event {name} = {" ".join(event.labels())}')
  if simple:
    chunks.append('\n'.join(simple))

  for name in document.credals:
    declaration = document.declarations[name]
    lines = [f'credal {name}{_factor_suffix(declaration.factor)}']
    lines += [f'  constraint {_table(g.rows)}' for g in declaration.constraints]
    lines += [f'  vertex {_table(g.rows)}' for g in declaration.vertices]
    lines.append('end')
    chunks.append('\n'.join(lines))

  for name in document.desirsets:
    declaration = document.declarations[name]
    head = f'desirset {name} {declaration.kind.value}'
    if declaration.credal:
      head += f' {declaration.credal}'
    lines = [head + _factor_suffix(declaration.factor)]
    lines += [f'  generator {_table(g.rows)}' for g in declaration.generators]
    lines += [f'  border {_table(g.rows)}' for g in declaration.border]
    lines += [f'  block {event} {credal}' for event, credal in declaration.blocks]
    lines += [f'  probe {probe}' for probe in declaration.probes]
    lines.append('end')
    chunks.append('\n'.join(lines))

  for name in document.relations:
    lines = [f'relation {name}']
    lines += [f'  prefer {p} {q}' for p, q in document.declarations[name]]
    lines.append('end')
    chunks.append('\n'.join(lines))
  return '\n\n'.join(chunks) + '\n'

# ────────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class QueryCommand:
  name: str
  arguments: tuple
  certificate: bool = False
  line: int = None

  def __str__(self):
    text = ' '.join((self.name,) + self.arguments)
    return text + (' --certificate' if self.certificate else '')


@dataclass(frozen=True)
class QueryScript:
  commands: tuple


def parse_command(words, line=None):
  words = list(words)
  certificate = '--certificate' in words
  words = [w for w in words if w != '--certificate']
  if not words:
    raise DocumentError('empty command', line)
  return QueryCommand(words[0], tuple(words[1:]), certificate, line)


def parse_script(text):
  commands = []
  for number, raw in enumerate(text.splitlines(), start=1):
    words = raw.split('#', 1)[0].split()
    if words:
      commands.append(parse_command(words, number))
  return QueryScript(tuple(commands))
