from django.apps import AppConfig


class SpacingVectorsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "spacing_vectors"
    verbose_name = "Exchangeable spacing vectors"
