from django.apps import AppConfig


class DistsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "dists"
    verbose_name = "Discrete distributions"
