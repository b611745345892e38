from pathlib import Path

from django import forms

from .baselines import DRIFT_BLENDS, LINEAR_SOLVERS, SCHEMES, OsmosisEvolutionConfig
from .energy import REGULARIZERS
from .images import ModelWeights
from .pipeline import RunConfig
from .solvers import INIT_CHOICES, IPianoConfig, PDConfig


def _choices(values):
    return [(value, value) for value in values]


def _float_list(text, name):
    try:
        values = tuple(float(item) for item in str(text).split(",") if item.strip())
    except ValueError:
        raise forms.ValidationError(f"{name} must be a comma-separated list of numbers.")
    if not values:
        raise forms.ValidationError(f"{name} must not be empty.")
    return values


class ImageInputsForm(forms.Form):
    """
    Input and output paths shared by every subcommand.

    ``inputs`` holds the positional files; outputs must point into an
    existing directory.
    """

    output = forms.CharField(required=False)

    expected_inputs = (3,)

    def __init__(self, data, inputs=(), **kwargs):
        super().__init__(data, **kwargs)
        self.inputs = tuple(inputs)

    def _existing_file(self, path):
        if not Path(path).is_file():
            raise forms.ValidationError(f"input file {path} does not exist.")
        return Path(path)

    def _writable(self, value):
        if not value:
            return None
        path = Path(value)
        if not path.parent.is_dir():
            raise forms.ValidationError(f"directory {path.parent} does not exist.")
        return path

    def clean_output(self):
        return self._writable(self.cleaned_data.get("output"))

    def clean(self):
        cleaned = super().clean()
        if len(self.inputs) not in self.expected_inputs:
            counts = " or ".join(str(n) for n in self.expected_inputs)
            raise forms.ValidationError(f"expected {counts} input files, got {len(self.inputs)}.")
        try:
            self.inputs = tuple(self._existing_file(path) for path in self.inputs)
        except forms.ValidationError as exc:
            self.add_error(None, exc)
        return cleaned


class WeightsForm(ImageInputsForm):
    eta = forms.FloatField(min_value=0)
    mu = forms.FloatField()
    gamma = forms.FloatField(min_value=0)
    eps = forms.FloatField()
    offset = forms.FloatField()
    alpha_blur = forms.FloatField(min_value=0)

    def clean_mu(self):
        mu = self.cleaned_data["mu"]
        if not mu > 0:
            raise forms.ValidationError("mu must be positive.")
        return mu

    def clean_eps(self):
        eps = self.cleaned_data["eps"]
        if not 0 < eps < 1:
            raise forms.ValidationError("eps must lie strictly between 0 and 1.")
        return eps

    def clean_offset(self):
        offset = self.cleaned_data["offset"]
        if not offset > 0:
            raise forms.ValidationError("offset must be positive.")
        return offset

    def model_weights(self):
        data = self.cleaned_data
        return ModelWeights(
            eta=data["eta"], mu=data["mu"], gamma=data["gamma"], eps=data["eps"], offset=data["offset"],
        )


class SolverForm(WeightsForm):
    beta1 = forms.FloatField(min_value=0)
    beta2 = forms.FloatField(min_value=0)
    tol = forms.FloatField()
    maxiter = forms.IntegerField(min_value=1)
    backtrack_maxiter = forms.IntegerField(min_value=1)
    inner_tol = forms.FloatField()
    inner_maxiter = forms.IntegerField(min_value=1)
    regularizer = forms.ChoiceField(choices=_choices(REGULARIZERS))

    def _beta(self, name):
        beta = self.cleaned_data[name]
        if not beta < 0.5:
            raise forms.ValidationError(f"{name} must be below 0.5.")
        return beta

    def clean_beta1(self):
        return self._beta("beta1")

    def clean_beta2(self):
        return self._beta("beta2")

    def clean_tol(self):
        tol = self.cleaned_data["tol"]
        if not tol > 0:
            raise forms.ValidationError("tol must be positive.")
        return tol

    def clean_inner_tol(self):
        tol = self.cleaned_data["inner_tol"]
        if not tol > 0:
            raise forms.ValidationError("inner tol must be positive.")
        return tol

    def solver_configs(self):
        data = self.cleaned_data
        ipiano = IPianoConfig(
            beta1=data["beta1"], beta2=data["beta2"], tol=data["tol"],
            maxiter=data["maxiter"], backtrack_maxiter=data["backtrack_maxiter"],
        )
        return ipiano, PDConfig(inner_tol=data["inner_tol"], inner_maxiter=data["inner_maxiter"])


class FuseForm(SolverForm):
    init = forms.ChoiceField(choices=_choices(INIT_CHOICES))
    trace = forms.CharField(required=False)
    save_v = forms.CharField(required=False)

    def clean_trace(self):
        return self._writable(self.cleaned_data.get("trace"))

    def clean_save_v(self):
        return self._writable(self.cleaned_data.get("save_v"))

    def clean(self):
        cleaned = super().clean()
        if not cleaned.get("output"):
            self.add_error("output", "an output path is required.")
        return cleaned

    def run_config(self):
        data = self.cleaned_data
        ipiano, primal_dual = self.solver_configs()
        return RunConfig(
            subcommand="fuse", inputs=self.inputs, output=data["output"],
            save_v=data.get("save_v"), trace=data.get("trace"),
            weights=self.model_weights(), ipiano=ipiano, primal_dual=primal_dual,
            init=data["init"], regularizer=data["regularizer"], alpha_blur=data["alpha_blur"],
        )


class SweepForm(SolverForm):
    etas = forms.CharField()
    mus = forms.CharField()
    gammas = forms.CharField()
    inits = forms.CharField()
    output_dir = forms.CharField(required=False)

    def clean_etas(self):
        values = _float_list(self.cleaned_data["etas"], "etas")
        if min(values) < 0:
            raise forms.ValidationError("etas must be non-negative.")
        return values

    def clean_mus(self):
        values = _float_list(self.cleaned_data["mus"], "mus")
        if min(values) <= 0:
            raise forms.ValidationError("mus must be positive.")
        return values

    def clean_gammas(self):
        values = _float_list(self.cleaned_data["gammas"], "gammas")
        if min(values) < 0:
            raise forms.ValidationError("gammas must be non-negative.")
        return values

    def clean_inits(self):
        inits = tuple(item.strip() for item in self.cleaned_data["inits"].split(",") if item.strip())
        unknown = [item for item in inits if item not in INIT_CHOICES]
        if not inits or unknown:
            raise forms.ValidationError(f"inits must be taken from {', '.join(INIT_CHOICES)}.")
        return inits

    def run_config(self):
        data = self.cleaned_data
        ipiano, primal_dual = self.solver_configs()
        return RunConfig(
            subcommand="sweep", inputs=self.inputs,
            weights=self.model_weights(), ipiano=ipiano, primal_dual=primal_dual,
            regularizer=data["regularizer"], alpha_blur=data["alpha_blur"],
            etas=data["etas"], mus=data["mus"], gammas=data["gammas"], inits=data["inits"],
        )


class OsmosisForm(ImageInputsForm):
    time_step = forms.FloatField()
    final_time = forms.FloatField()
    scheme = forms.ChoiceField(choices=_choices(SCHEMES))
    linear_solver = forms.ChoiceField(choices=_choices(LINEAR_SOLVERS))
    solver_tol = forms.FloatField()
    solver_maxiter = forms.IntegerField(min_value=1)
    drift_blend = forms.ChoiceField(choices=_choices(DRIFT_BLENDS))
    offset = forms.FloatField()
    alpha_blur = forms.FloatField(min_value=0)

    expected_inputs = (2, 3)

    def clean(self):
        cleaned = super().clean()
        if not cleaned.get("output"):
            self.add_error("output", "an output path is required.")
        try:
            self.evolution = OsmosisEvolutionConfig(
                time_step=cleaned.get("time_step"), final_time=cleaned.get("final_time"),
                scheme=cleaned.get("scheme"), linear_solver=cleaned.get("linear_solver"),
                solver_tol=cleaned.get("solver_tol"), solver_maxiter=cleaned.get("solver_maxiter"),
            )
        except (TypeError, ValueError) as exc:
            raise forms.ValidationError(str(exc))
        if not (cleaned.get("offset") or 0) > 0:
            self.add_error("offset", "offset must be positive.")
        return cleaned

    def run_config(self):
        data = self.cleaned_data
        return RunConfig(
            subcommand="osmosis", inputs=self.inputs, output=data["output"],
            weights=ModelWeights(offset=data["offset"]), osmosis=self.evolution,
            drift_blend=data["drift_blend"], alpha_blur=data["alpha_blur"],
        )


class BlendForm(ImageInputsForm):
    alpha_blur = forms.FloatField(min_value=0)

    def clean(self):
        cleaned = super().clean()
        if not cleaned.get("output"):
            self.add_error("output", "an output path is required.")
        return cleaned

    def run_config(self, subcommand="blend"):
        data = self.cleaned_data
        return RunConfig(
            subcommand=subcommand, inputs=self.inputs, output=data["output"],
            alpha_blur=data.get("alpha_blur") or 0.0,
        )


class PoissonForm(BlendForm):
    alpha_blur = None

    def run_config(self):
        return super().run_config("poisson")


class MetricsForm(ImageInputsForm):
    offset = forms.FloatField()

    expected_inputs = (2,)

    def clean_offset(self):
        offset = self.cleaned_data["offset"]
        if not offset > 0:
            raise forms.ValidationError("offset must be positive.")
        return offset

    def run_config(self):
        data = self.cleaned_data
        return RunConfig(
            subcommand="metrics", inputs=self.inputs, metrics=data["output"],
            weights=ModelWeights(offset=data["offset"]),
        )
