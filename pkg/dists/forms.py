from django import forms
from django.core.exceptions import ValidationError

from spread_sampling.exceptions import ParameterDomainError, SamplingError

from .distributions import FAMILIES

# Parameters each family expects in its JSON spec.
FAMILY_PARAMETERS = {
    "bernoulli": ("p",),
    "binomial": ("n", "p"),
    "geometric": ("p",),
    "neg_binomial": ("r", "p"),
    "poisson": ("lambda",),
    "hypergeometric": ("m", "r", "R"),
    "neg_hypergeometric": ("m", "r", "R"),
    "uniform": ("a",),
    "degenerate": ("c",),
    "forward": ("of",),
}

# Parameters a design may derive from its sampling rate when they are omitted.
RATE_DERIVED = {
    "geometric": {"p"},
    "neg_binomial": {"p"},
    "poisson": {"lambda"},
    "binomial": {"n", "p"},
    "degenerate": {"c"},
}


def errors_as_line(form):
    """Flattens form errors to ``field: message; field: message`` on one line."""
    parts = []
    for field, messages in form.errors.items():
        label = "spec" if field == "__all__" else field
        parts.extend(f"{label}: {message}" for message in messages)
    return "; ".join(parts)


class DiscreteDistForm(forms.Form):
    """
    Validates a JSON distribution spec, e.g. {"family": "neg_binomial", "r": 2.0, "p": 0.4}.

    On success ``cleaned_data["dist"]`` holds the constructed distribution.
    With ``allow_missing`` set, parameters a design can derive from its rate
    may be omitted and ``cleaned_data["dist"]`` is None.
    """

    family = forms.ChoiceField(choices=[(name, name) for name in FAMILY_PARAMETERS])
    p = forms.FloatField(required=False)
    n = forms.IntegerField(required=False)
    r = forms.FloatField(required=False)
    m = forms.IntegerField(required=False)
    R = forms.FloatField(required=False)
    a = forms.IntegerField(required=False)
    c = forms.IntegerField(required=False)
    of = forms.JSONField(required=False)

    def __init__(self, *args, allow_missing=False, **kwargs):
        super().__init__(*args, **kwargs)
        self.allow_missing = allow_missing
        # "lambda" is a Python keyword, so the field is added by name.
        self.fields["lambda"] = forms.FloatField(required=False)

    def clean(self):
        cleaned = super().clean()
        family = cleaned.get("family")
        if not family:
            return cleaned

        expected = FAMILY_PARAMETERS[family]
        unknown = sorted(set(self.data) - set(expected) - {"family"})
        if unknown:
            raise ValidationError(f"unexpected parameters for {family}: {', '.join(unknown)}")

        missing = [name for name in expected if cleaned.get(name) is None]
        derivable = RATE_DERIVED.get(family, set()) if self.allow_missing else set()
        hard_missing = [name for name in missing if name not in derivable]
        if hard_missing:
            raise ValidationError(f"{family} needs {', '.join(hard_missing)}")
        if missing:
            cleaned["dist"] = None
            return cleaned

        try:
            if family == "forward":
                inner = dist_from_spec(cleaned["of"])
                cleaned["dist"] = FAMILIES["forward"](inner)
            else:
                values = [cleaned[name] for name in expected]
                cleaned["dist"] = FAMILIES[family](*values)
        except SamplingError as exc:
            raise ValidationError(str(exc))
        return cleaned


def dist_from_spec(spec):
    """Builds a distribution from its JSON spec; raises ParameterDomainError when invalid."""
    if not isinstance(spec, dict):
        raise ParameterDomainError(f"a distribution spec must be a JSON object, got {spec!r}")
    form = DiscreteDistForm(data=spec)
    if not form.is_valid():
        raise ParameterDomainError(errors_as_line(form))
    return form.cleaned_data["dist"]


def dist_to_spec(dist):
    return dist.to_spec()
