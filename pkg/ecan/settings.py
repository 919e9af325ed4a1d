"""
Django settings for the ecan project.

The project has no HTTP surface: it is driven through management commands
(`run`, `validate`, `grid_info`) and the `tunnel` app library.
"""
from environ import Env
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

Env.read_env(BASE_DIR / '.env')

env = Env()

SECRET_KEY = env.str('SECRET_KEY', default='ecan-development-only-key')

DEBUG = env.bool('DEBUG', default=True)

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=[])

# Application definition
DJANGO_APPS = []

SELF_DEFINED_APPS = [
    'tunnel.apps.TunnelConfig'
]

INSTALLED_APPS = DJANGO_APPS + SELF_DEFINED_APPS

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'autoescape': True,
        },
    },
]

# Planner runs keep nothing in a database.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Solver schedule overrides; anything left out keeps the tunnel.conf defaults.
ECAN_SOLVER = {
    key: value for key, value in {
        'gap_tol': env.float('ECAN_GAP_TOL', default=None),
        'feas_tol': env.float('ECAN_FEAS_TOL', default=None),
        'max_newton': env.int('ECAN_MAX_NEWTON', default=None),
    }.items() if value is not None
}

ECAN_LOG = env.str('ECAN_LOG', default='INFO').upper()

ECAN_AUDIT_LOG = env.str('ECAN_AUDIT_LOG', default='')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(levelname)s %(asctime)s %(module)s %(message)s'
        },
        'simple': {
            'format': '%(levelname)s %(message)s'
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'ERROR',
            'propagate': True,
        },
        'audit_logger': {
            'handlers': ['console'],
            'level': ECAN_LOG,
            'propagate': False,
        },
        'error_logger': {
            'handlers': ['console'],
            'level': 'ERROR',
            'propagate': False,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
}

if ECAN_AUDIT_LOG:
    LOGGING['handlers']['audit_jsonl'] = {
        'level': 'INFO',
        'class': 'tunnel.log_handlers.RunAuditHandler',
        'path': ECAN_AUDIT_LOG,
    }
    LOGGING['loggers']['audit_logger']['handlers'].append('audit_jsonl')
    LOGGING['loggers']['error_logger']['handlers'].append('audit_jsonl')
