from django.apps import AppConfig


class IndependenceConfig(AppConfig):
  name = 'independence'
  verbose_name = 'State Independence'
