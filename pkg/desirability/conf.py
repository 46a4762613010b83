from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
  'VERTEX_SUBSET_LIMIT': 250000,
  'REPORT_WORKERS': 1,
  'WILLIAMS_PROBE_LIMIT': 20000,
}


def kernel_setting(name):
  """A value of settings.CREDALKIT, falling back to the defaults when Django is not configured."""
  try:
    configured = getattr(settings, 'CREDALKIT', {})
  except ImproperlyConfigured:
    configured = {}
  return configured.get(name, DEFAULTS[name])
