"""
Django settings for the osmofusion project.

There is no web surface: Django hosts the configuration, the management
commands (fuse, osmosis, poisson, metrics, blend, sweep) and the test runner.
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get(
    "DJANGO_SECRET_KEY",
    "django-insecure-osmofusion-batch-only-no-sessions",
)

DEBUG = os.environ.get("DJANGO_DEBUG", "0") == "1"
ALLOWED_HOSTS = []


# Application definition
INSTALLED_APPS = [
    "fusion.apps.FusionConfig",
]

# No models; commands and tests run without a database.
DATABASES = {}


# Internationalization
LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True


# Media files (fusion results written by the sweep command)
MEDIA_ROOT = Path(os.environ.get("FUSION_MEDIA_ROOT", BASE_DIR / "media"))


FUSION = {
    # trace and metrics CSV precision
    "CSV_SIGNIFICANT_DIGITS": 12,
    # threads used for per-channel linear solves in the baselines
    "CHANNEL_WORKERS": int(os.environ.get("FUSION_CHANNEL_WORKERS", "1")),
    "SWEEP_OUTPUT_DIR": MEDIA_ROOT / "sweeps",
}


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "fusion": {
            "handlers": ["console"],
            "level": os.environ.get("FUSION_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
}
