from django import forms

from tunnel.planner import POINT_AGENT_MODES


class ScenarioForm(forms.Form):
    dimension = forms.TypedChoiceField(choices=((2, '2'), (3, '3')), coerce=int)
    seed = forms.IntegerField(required=False, min_value=0)
    agent = forms.JSONField(required=False)
    start = forms.JSONField()
    goal = forms.JSONField()
    obstacles = forms.JSONField(required=False)
    params = forms.JSONField(required=False)


class AgentForm(forms.Form):
    kind = forms.ChoiceField(choices=(('point', 'point'), ('box', 'box'), ('plane', 'plane')))
    dims = forms.JSONField(required=False)


class BoxDimsForm(forms.Form):
    width = forms.FloatField(min_value=0.0)
    height = forms.FloatField(min_value=0.0)


class StartForm(forms.Form):
    position = forms.JSONField()
    heading = forms.JSONField(required=False)


class ObstaclesForm(forms.Form):
    points = forms.JSONField(required=False)
    boxes = forms.JSONField(required=False)
    polygons = forms.JSONField(required=False)
    random_points = forms.JSONField(required=False)


class BoxForm(forms.Form):
    min = forms.JSONField()
    max = forms.JSONField()


class RandomPointsForm(forms.Form):
    count = forms.IntegerField(min_value=0)
    min = forms.JSONField()
    max = forms.JSONField()
    clearance = forms.FloatField(required=False, min_value=0.0)


class ParamsForm(forms.Form):
    delta1 = forms.FloatField(required=False)
    alpha = forms.FloatField(required=False)
    beta = forms.FloatField(required=False)
    gamma = forms.FloatField(required=False)
    epsilon = forms.FloatField(required=False)
    R_fov = forms.FloatField(required=False)
    theta_fov = forms.FloatField(required=False, max_value=180.0)
    phi_fov = forms.FloatField(required=False, max_value=90.0)
    dr = forms.FloatField(required=False)
    dtheta = forms.FloatField(required=False)
    dphi = forms.FloatField(required=False)
    max_steps = forms.IntegerField(required=False, min_value=1)
    point_agent_delta2_mode = forms.ChoiceField(required=False, choices=[(m, m) for m in POINT_AGENT_MODES])
    goal_lead = forms.FloatField(required=False, min_value=0.0)
    first_return = forms.NullBooleanField(required=False)
    stall_steps = forms.IntegerField(required=False, min_value=1)
    stall_tol = forms.FloatField(required=False, min_value=0.0)

    POSITIVE = ('delta1', 'beta', 'epsilon', 'R_fov', 'theta_fov', 'phi_fov', 'dr', 'dtheta', 'dphi')

    def clean(self):
        cleaned = super().clean()
        for name in self.POSITIVE:
            value = cleaned.get(name)
            if value is not None and value <= 0:
                self.add_error(name, f"must be positive, got {value}")
        alpha = cleaned.get('alpha')
        if alpha is not None and not 0 < alpha <= 1:
            self.add_error('alpha', f"must lie in (0, 1], got {alpha}")
        gamma = cleaned.get('gamma')
        if gamma is not None and not 0 < gamma <= 1e-3:
            self.add_error('gamma', f"must lie in (0, 1e-3], got {gamma}")
        return cleaned

    def overrides(self):
        """Only the fields the scenario actually set."""
        return {
            name: value for name, value in self.cleaned_data.items()
            if name in self.data and value not in (None, '')
        }
