import json

from django import forms
from django.core.exceptions import ValidationError

from designs.forms import design_from_spec
from dists.forms import errors_as_line
from spread_sampling.exceptions import ParameterDomainError, SamplingError

from .study import StudyConfig

CONFIG_FIELDS = {"seed", "N", "n", "reps", "designs", "ar_coefficient", "noise_sd", "ci_level"}


class StudyConfigForm(forms.Form):
    """
    Validates a study configuration and builds ``cleaned_data["config"]``.

    Example:
    {"seed": 20240501, "N": 200, "n": 50, "reps": 20000,
     "designs": [{"kind": "circular", "N": 200, "n": 50, "spacings": {"family": "mnom"}}]}

    Omitting ``designs`` runs the ten reference designs for N and n.
    """

    seed = forms.IntegerField(min_value=0)
    N = forms.IntegerField(required=False, min_value=1)
    n = forms.IntegerField(required=False, min_value=1)
    reps = forms.IntegerField(required=False, min_value=1)
    designs = forms.JSONField(required=False)
    ar_coefficient = forms.FloatField(required=False, min_value=0.0)
    noise_sd = forms.FloatField(required=False)
    ci_level = forms.FloatField(required=False)

    def clean_designs(self):
        designs = self.cleaned_data.get("designs")
        if designs is None and self.data.get("designs") is None:
            return None
        if not isinstance(designs, list) or not designs:
            raise ValidationError("designs must be a non-empty list of design specs")
        for position, spec in enumerate(designs):
            try:
                design_from_spec(spec)
            except SamplingError as exc:
                raise ValidationError(f"design {position}: {exc}")
        return designs

    def clean(self):
        cleaned = super().clean()
        unknown = sorted(set(self.data) - CONFIG_FIELDS)
        if unknown:
            raise ValidationError(f"unexpected study fields: {', '.join(unknown)}")
        if self.errors:
            return cleaned

        values = {name: value for name, value in cleaned.items() if value is not None}
        try:
            config = StudyConfig(**values)
            config.design_values()
        except SamplingError as exc:
            raise ValidationError(str(exc))
        cleaned["config"] = config
        return cleaned


def study_config_from_spec(spec):
    """Parses a study configuration given as a dict or a JSON string."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ParameterDomainError(f"malformed JSON study config: {exc}")
    if not isinstance(spec, dict):
        raise ParameterDomainError(f"a study config must be a JSON object, got {spec!r}")
    form = StudyConfigForm(data=spec)
    if not form.is_valid():
        raise ParameterDomainError(errors_as_line(form))
    return form.cleaned_data["config"]
