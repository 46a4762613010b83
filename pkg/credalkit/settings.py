"""
Django settings for credalkit project.

Generated by 'django-admin startproject' using Django 3.2.

The project has no web surface: it is driven through `manage.py credal ...`
and `manage.py test`. Everything configurable is read from the environment
through django-environ (an optional .env file next to manage.py is honoured).

For the full list of settings and their values, see
https://docs.djangoproject.com/en/3.2/ref/settings/
"""

import os

import environ

env = environ.Env(
    DEBUG_VALUE=(bool, False),
    CREDALKIT_LOG_LEVEL=(str, 'WARNING'),
    CREDALKIT_LOG_FILE=(str, ''),
    CREDALKIT_VERTEX_SUBSET_LIMIT=(int, 250000),
    CREDALKIT_REPORT_WORKERS=(int, 1),
    CREDALKIT_WILLIAMS_PROBE_LIMIT=(int, 20000),
)

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

environ.Env.read_env(os.path.join(BASE_DIR, '.env'))

# Only used by Django internals (signing); nothing here is served.
SECRET_KEY = env('SECRET_KEY', default='credalkit-local-only-key')

DEBUG = env('DEBUG_VALUE')

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'desirability',
    'preferences',
    'independence',
]

# No models anywhere; the dummy backend keeps `manage.py check` quiet.
DATABASES = {}

USE_TZ = True

TIME_ZONE = 'UTC'

# ────────────────────────────────────────────────────────────────────────────────

# Kernel limits. Read lazily by the apps through django.conf.settings.

CREDALKIT = {
    'VERTEX_SUBSET_LIMIT': env('CREDALKIT_VERTEX_SUBSET_LIMIT'),
    'REPORT_WORKERS': env('CREDALKIT_REPORT_WORKERS'),
    'WILLIAMS_PROBE_LIMIT': env('CREDALKIT_WILLIAMS_PROBE_LIMIT'),
}

# ────────────────────────────────────────────────────────────────────────────────

LOG_LEVEL = env('CREDALKIT_LOG_LEVEL').upper()
LOG_FILE = env('CREDALKIT_LOG_FILE')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        # Worker threads of `credal run` show up in the trace
        'kernel_trace': {
            'format': '%(asctime)s %(levelname)s %(threadName)s %(name)s:%(lineno)s %(message)s',
        },
        'kernel_console': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'kernel_console'
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'propagate': True,
            'level': 'WARNING',
        },
        'desirability': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
        },
        'preferences': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
        },
        'independence': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
        },
    }
}

if LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': 'DEBUG',
        'class': 'logging.FileHandler',
        'filename': LOG_FILE,
        'formatter': 'kernel_trace'
    }
    for logger in ('desirability', 'preferences', 'independence'):
        LOGGING['loggers'][logger]['handlers'].append('file')
