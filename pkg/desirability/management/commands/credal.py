import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from desirability.documents import QueryCommand, parse_document, parse_script
from desirability.exceptions import InputError, ModelError, ResourceLimitError, SolverError
from desirability.runner import BAD_INPUT, OK, Runner, run

logger = logging.getLogger(__name__)

SUBCOMMANDS = sorted(list(Runner.COMMANDS) + ['run'])


def _read(path):
  try:
    return Path(path).read_text(encoding='utf-8')
  except OSError as error:
    raise CommandError(f'cannot read {path}: {error.strerror}', returncode=BAD_INPUT)


class Command(BaseCommand):
  help = 'Answer exact queries about sets of desirable gambles, credal sets and preferences.'

  def add_arguments(self, parser):
    parser.add_argument('--document', help='problem document the names refer to')
    parser.add_argument('--certificate', action='store_true', help='print replay-verified certificates')
    parser.add_argument('--workers', type=int, default=None, help='threads used by "run"')
    parser.add_argument('subcommand', choices=SUBCOMMANDS)
    parser.add_argument('arguments', nargs='*')

  def handle(self, *args, **options):
    subcommand, arguments = options['subcommand'], list(options['arguments'])
    document_path = options['document']
    if subcommand == 'check' and document_path is None and arguments:
      document_path = arguments.pop(0)
    if document_path is None:
      raise CommandError('a problem document is required (--document DOC)', returncode=BAD_INPUT)

    try:
      document = parse_document(_read(document_path))
    except InputError as error:
      raise CommandError('; '.join(error.messages), returncode=BAD_INPUT)
    except (ModelError, ResourceLimitError, SolverError) as error:
      raise CommandError(str(error), returncode=1)

    if subcommand == 'run':
      if len(arguments) != 1:
        raise CommandError('"run" takes a script path', returncode=BAD_INPUT)
      try:
        script = parse_script(_read(arguments[0]))
      except InputError as error:
        raise CommandError('; '.join(error.messages), returncode=BAD_INPUT)
      report = run(script, document, options['workers'])
      for line in report.lines():
        self.stdout.write(line)
      status = report.status
    else:
      command = QueryCommand(subcommand, tuple(arguments), options['certificate'])
      answer = Runner(document).answer(command)
      for line in answer.lines:
        self.stdout.write(line)
      status = answer.status

    if status != OK:
      raise CommandError(f'{subcommand} finished with status {status}', returncode=status)
