import json
import math

from django import forms
from django.core.exceptions import ValidationError

from dists.forms import DiscreteDistForm, errors_as_line
from spacing_vectors.forms import spacing_from_spec
from spread_sampling.exceptions import ParameterDomainError, SamplingError

from .core import CircularDesign, EquilibriumRenewalDesign, RenewalDesign, jump_for_rate

DESIGN_KINDS = {
    "renewal": RenewalDesign,
    "equilibrium": EquilibriumRenewalDesign,
    "circular": CircularDesign,
}

KIND_FIELDS = {
    "renewal": {"kind", "N", "rate", "jump"},
    "equilibrium": {"kind", "N", "rate", "jump"},
    "circular": {"kind", "N", "n", "spacings"},
}

# Jump parameter playing the role of the shape r in the rate parametrisations.
SHAPE_PARAMETER = {"neg_binomial": "r", "binomial": "n"}


class DesignSpecForm(forms.Form):
    """
    Validates a design spec and builds the design into ``cleaned_data["design"]``.

    Examples:
    {"kind": "circular", "N": 200, "n": 50, "spacings": {"family": "mnh", "r": 5.0}}
    {"kind": "equilibrium", "N": 300, "rate": 0.0333, "jump": {"family": "neg_binomial", "r": 2}}

    A renewal jump may omit the parameters its family derives from ``rate``.
    """

    kind = forms.ChoiceField(choices=[(name, name) for name in DESIGN_KINDS])
    N = forms.IntegerField(min_value=1)
    n = forms.IntegerField(required=False, min_value=1)
    rate = forms.FloatField(required=False)
    jump = forms.JSONField(required=False)
    spacings = forms.JSONField(required=False)

    def clean(self):
        cleaned = super().clean()
        kind, N = cleaned.get("kind"), cleaned.get("N")
        if kind is None or N is None:
            return cleaned

        unknown = sorted(set(self.data) - KIND_FIELDS[kind])
        if unknown:
            raise ValidationError(f"unexpected fields for a {kind} design: {', '.join(unknown)}")

        try:
            if kind == "circular":
                cleaned["design"] = self._circular(cleaned)
            else:
                cleaned["design"] = self._renewal(DESIGN_KINDS[kind], cleaned)
        except SamplingError as exc:
            raise ValidationError(str(exc))
        return cleaned

    def _circular(self, cleaned):
        N, n = cleaned["N"], cleaned.get("n")
        if n is None or cleaned.get("spacings") is None:
            raise ValidationError("a circular design needs n and spacings")
        if n > N:
            raise ValidationError(f"a circular design needs n <= N, got n={n} N={N}")
        return CircularDesign(spacing_from_spec(cleaned["spacings"], N, n), N, n)

    def _renewal(self, cls, cleaned):
        spec = cleaned.get("jump")
        rate = cleaned.get("rate")
        if not isinstance(spec, dict):
            raise ValidationError("a renewal design needs a jump spec object")

        jump_form = DiscreteDistForm(data=spec, allow_missing=True)
        if not jump_form.is_valid():
            raise ValidationError(f"jump: {errors_as_line(jump_form)}")
        jump = jump_form.cleaned_data["dist"]

        if jump is None:
            if rate is None:
                raise ValidationError("jump parameters may only be omitted when rate is given")
            family = jump_form.cleaned_data["family"]
            shape = jump_form.cleaned_data.get(SHAPE_PARAMETER.get(family, ""))
            jump = jump_for_rate(family, rate, shape)

        design = cls(jump, cleaned["N"])
        if rate is not None and not math.isclose(design.rate, rate, rel_tol=1e-9, abs_tol=1e-12):
            raise ValidationError(f"rate {rate!r} does not match the jump law (rate {design.rate!r})")
        return design


def design_from_spec(spec):
    """Parses a design spec given as a dict or a JSON string."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ParameterDomainError(f"malformed JSON design spec: {exc}")
    if not isinstance(spec, dict):
        raise ParameterDomainError(f"a design spec must be a JSON object, got {spec!r}")
    form = DesignSpecForm(data=spec)
    if not form.is_valid():
        raise ParameterDomainError(errors_as_line(form))
    return form.cleaned_data["design"]


def design_to_spec(design):
    if isinstance(design, CircularDesign):
        return {
            "kind": design.kind,
            "N": design.N,
            "n": design.n,
            "spacings": design.spacings.to_spec(),
        }
    return {
        "kind": design.kind,
        "N": design.N,
        "rate": design.rate,
        "jump": design.jump.to_spec(),
    }
