from pathlib import Path
import environ
import sys


# Step 1: Initialize django-environ
# ==============================================================================
env = environ.Env(
    # Set casting and default values for key variables
    DEBUG=(bool, False),
    LOG_LEVEL=(str, "WARNING"),
)


# Step 2: Set paths and read the .env file
# ==============================================================================
# BASE_DIR points to the project's root folder (where manage.py is)
BASE_DIR = Path(__file__).resolve().parent.parent

environ.Env.read_env(BASE_DIR / ".env")


# Step 3: Core Security Settings
# ==============================================================================
# The project only serves the admin site for browsing stored studies.
SECRET_KEY = env("SECRET_KEY", default="spread-sampling-local-development-key")

DEBUG = env("DEBUG")

ALLOWED_HOSTS = env.list("ALLOWED_HOSTS", default=["127.0.0.1", "localhost"])


# Step 4: Application & Middleware Definitions
# ==============================================================================
INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    # Local Apps
    "dists.apps.DistsConfig",
    "spacing_vectors.apps.SpacingVectorsConfig",
    "designs.apps.DesignsConfig",
    "inclusion.apps.InclusionConfig",
    "estimation.apps.EstimationConfig",
    "oracle.apps.OracleConfig",
    "simlab.apps.SimlabConfig",
    "cli.apps.CliConfig",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "spread_sampling.urls"
WSGI_APPLICATION = "spread_sampling.wsgi.application"


# Step 5: Templates Configuration
# ==============================================================================
TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.debug",
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]


# Step 6: Database Configuration
# ==============================================================================
# Stored simulation studies live here. DATABASE_URL accepts any URL that
# env.db() understands, e.g. sqlite:////tmp/studies.sqlite3
DATABASES = {
    "default": env.db("DATABASE_URL", default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}"),
}

# Switch to an in-memory SQLite database when running tests
if "test" in sys.argv:
    DATABASES["default"] = {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    }


# Step 7: Internationalization & Static Files
# ==============================================================================
LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True
STATIC_URL = "static/"
STATIC_ROOT = BASE_DIR / "staticfiles"
DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Step 8: Logging
# ==============================================================================
# LOG_LEVEL is the only environment variable that changes command behaviour.
LOG_LEVEL = env("LOG_LEVEL").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s %(message)s"},
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "root": {"handlers": ["console"], "level": LOG_LEVEL},
    "loggers": {
        "django": {"handlers": ["console"], "level": "WARNING", "propagate": False},
    },
}


# Step 9: Sampling Library Tolerances
# ==============================================================================
# Numerical tolerances and guards. Read through sampling_setting() so that the
# library also works when imported without a configured Django project.
SAMPLING = {
    "TAIL_MASS": 1e-12,
    "PMF_TOLERANCE": 1e-10,
    "FLATNESS_TOLERANCE": 1e-9,
    "ROWSUM_TOLERANCE": 1e-9,
    "ENUMERATION_GUARD": 10**6,
    "RENEWAL_ENUMERATION_MAX_N": 16,
}
