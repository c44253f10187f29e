from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    "TAIL_MASS": 1e-12,
    "PMF_TOLERANCE": 1e-10,
    "FLATNESS_TOLERANCE": 1e-9,
    "ROWSUM_TOLERANCE": 1e-9,
    "ENUMERATION_GUARD": 10**6,
    "RENEWAL_ENUMERATION_MAX_N": 16,
}


def sampling_setting(name):
    """
    Returns a tolerance or guard from ``settings.SAMPLING``.

    Falls back to DEFAULTS when the key is missing or when no Django
    settings module is configured (plain library use).
    """
    try:
        overrides = getattr(settings, "SAMPLING", {})
    except ImproperlyConfigured:
        overrides = {}
    return overrides.get(name, DEFAULTS[name])
