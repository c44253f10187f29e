from django import forms
from django.core.exceptions import ValidationError

from dists.forms import errors_as_line
from spread_sampling.exceptions import ParameterDomainError

from .vectors import SPACING_FAMILIES

# Family parameters besides the total m and the dimension n, which come from the design.
SPACING_PARAMETERS = {"mnh": ("r",), "mnom": (), "mh": ("r",)}


class SpacingSpecForm(forms.Form):
    """
    Validates a spacing law spec such as {"family": "mnh", "r": 5.0}.
    """

    family = forms.ChoiceField(choices=[(name, name) for name in SPACING_FAMILIES])
    r = forms.FloatField(required=False)

    def clean(self):
        cleaned = super().clean()
        family = cleaned.get("family")
        if not family:
            return cleaned
        expected = SPACING_PARAMETERS[family]
        unknown = sorted(set(self.data) - set(expected) - {"family"})
        if unknown:
            raise ValidationError(f"unexpected parameters for {family}: {', '.join(unknown)}")
        missing = [name for name in expected if cleaned.get(name) is None]
        if missing:
            raise ValidationError(f"{family} needs {', '.join(missing)}")
        return cleaned


def spacing_from_spec(spec, N, n):
    """Builds the spacing law of a circular design of size n in a population of N."""
    if not isinstance(spec, dict):
        raise ParameterDomainError(f"a spacing spec must be a JSON object, got {spec!r}")
    form = SpacingSpecForm(data=spec)
    if not form.is_valid():
        raise ParameterDomainError(errors_as_line(form))
    family = form.cleaned_data["family"]
    params = [form.cleaned_data[name] for name in SPACING_PARAMETERS[family]]
    return SPACING_FAMILIES[family](N - n, n, *params)
