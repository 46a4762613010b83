from django.apps import AppConfig


class DesirabilityConfig(AppConfig):
  name = 'desirability'
  verbose_name = 'Desirable Gambles'
