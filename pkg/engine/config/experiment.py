"""
Experiment configuration files (key=value lines)
"""
import hashlib
import math
from pathlib import Path

from marshmallow import RAISE, Schema, ValidationError, fields, validate, validates_schema

from errors import ConfigError
from .settings import Config

MAX_FIXED_EPSILON = math.exp(-math.e)


class FloatList(fields.Field):
    """Comma separated floats; a bare number is a one-element list"""

    def _deserialize(self, value, attr, data, **kwargs):
        items = value if isinstance(value, (list, tuple)) else str(value).split(',')
        try:
            return [float(item) for item in items if str(item).strip() != '']
        except ValueError as error:
            raise ValidationError('Not a comma-separated list of numbers.') from error

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else [float(v) for v in value]


class IntList(fields.Field):
    """Comma separated positive integers"""

    def _deserialize(self, value, attr, data, **kwargs):
        items = value if isinstance(value, (list, tuple)) else str(value).split(',')
        try:
            parsed = [int(item) for item in items if str(item).strip() != '']
        except ValueError as error:
            raise ValidationError('Not a comma-separated list of integers.') from error
        if not parsed or any(n < 3 for n in parsed):
            raise ValidationError('Resolutions must be at least 3 cells per axis.')
        return parsed

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else [int(v) for v in value]


class AutoFloat(fields.Field):
    """Float or the literal 'auto'"""

    def _deserialize(self, value, attr, data, **kwargs):
        if value is None or str(value).strip().lower() == 'auto':
            return 'auto'
        try:
            number = float(value)
        except ValueError as error:
            raise ValidationError("Expected a number or 'auto'.") from error
        if not 0 < number < 1:
            raise ValidationError('Must lie in (0, 1).')
        return number


def _open_unit(**kwargs):
    return validate.Range(min=0, max=1, min_inclusive=False, max_inclusive=False, **kwargs)


def _positive():
    return validate.Range(min=0, min_inclusive=False)


class ExperimentSchema(Schema):
    """Validated experiment knobs; unknown keys are rejected"""

    class Meta:
        unknown = RAISE
        ordered = True

    domain_lower = FloatList(load_default=lambda: [0.0])
    domain_upper = FloatList(load_default=lambda: [1.0])
    resolution = IntList(load_default=lambda: [256])
    center = FloatList(load_default=lambda: [0.5])
    epsilon0 = fields.Float(load_default=0.1, validate=_positive())
    delta = fields.Float(load_default=0.5, validate=_open_unit())
    profile = fields.String(load_default='bump', validate=validate.OneOf(['bump']))
    eta = fields.Float(load_default=0.1, validate=_open_unit())
    eta_search = fields.String(load_default='certified',
                               validate=validate.OneOf(['certified', 'ob1', 'fixed']))
    epsilon = fields.Float(load_default=None, allow_none=True,
                           validate=validate.Range(min=0, max=MAX_FIXED_EPSILON, min_inclusive=False))
    mode = fields.String(load_default='box', validate=validate.OneOf(['box', 'band']))
    k = fields.Integer(load_default=1, validate=validate.Range(min=1))
    M = fields.Float(load_default=0.25, validate=validate.Range(min=0, max=1, min_inclusive=False))
    T = fields.Float(load_default=0.01, validate=_positive())
    N = fields.Integer(load_default=8, validate=validate.Range(min=0))
    iters = fields.Integer(load_default=2000, validate=validate.Range(min=1))
    tol = fields.Float(load_default=1e-6, validate=_positive())
    step_constant = fields.Float(load_default=1.0, validate=_positive())
    seed = fields.Integer(load_default=0, validate=validate.Range(min=0))
    trials = fields.Integer(load_default=20, validate=validate.Range(min=1))
    modes_cap = fields.Integer(load_default=64, validate=validate.Range(min=1))
    threads = fields.Integer(load_default=0, validate=validate.Range(min=0))
    eta0 = AutoFloat(load_default='auto')
    c_sd = fields.Float(load_default=1.0, validate=_positive())
    pencil_radius = fields.Integer(load_default=2, validate=validate.Range(min=0))
    pencil_stride = fields.Integer(load_default=0, validate=validate.Range(min=0))
    epsilon1 = fields.Float(load_default=0.5, validate=_open_unit())
    mask = fields.String(load_default=None, allow_none=True)

    @validates_schema
    def validate_geometry(self, data, **kwargs):
        lower = data.get('domain_lower', [0.0])
        upper = data.get('domain_upper', [1.0])
        d = len(lower)
        if d not in (1, 2, 3):
            raise ValidationError('Only dimensions 1, 2 and 3 are supported.', 'domain_lower')
        if len(upper) != d:
            raise ValidationError('domain_upper must match domain_lower.', 'domain_upper')
        if any(hi <= lo for lo, hi in zip(lower, upper)):
            raise ValidationError('Each upper corner must exceed the lower corner.', 'domain_upper')
        if len(data.get('center', [0.5])) != d:
            raise ValidationError('center must have one coordinate per axis.', 'center')
        if len(data.get('resolution', [256])) not in (1, d):
            raise ValidationError('resolution must be one value or one per axis.', 'resolution')
        if data.get('eta_search') == 'fixed' and data.get('epsilon') is None:
            raise ValidationError('eta_search=fixed needs an epsilon.', 'epsilon')


class ExperimentConfig:
    """Resolved experiment configuration"""

    def __init__(self, **values):
        for key, value in values.items():
            setattr(self, key, value)
        self._keys = sorted(values)

    @property
    def d(self):
        return len(self.domain_lower)

    @property
    def resolution_tuple(self):
        if len(self.resolution) == 1:
            return tuple(self.resolution) * self.d
        return tuple(self.resolution)

    def domain(self):
        """Box domain described by the configuration"""
        from models.domain import BoxDomain
        return BoxDomain(self.domain_lower, self.domain_upper)

    def bump(self):
        """Initial bump described by the configuration"""
        from models.frame import BumpSpec
        return BumpSpec(epsilon0=self.epsilon0, center=self.center, delta=self.delta,
                        profile=self.profile)

    def to_dict(self):
        """Convert configuration to dictionary"""
        return {key: getattr(self, key) for key in self._keys}

    def canonical_text(self):
        """Stable key=value rendering used for hashing and reports"""
        lines = []
        for key in self._keys:
            lines.append(f'{key}={_render(getattr(self, key))}')
        return '\n'.join(lines) + '\n'

    @property
    def config_hash(self):
        return hashlib.sha256(self.canonical_text().encode('utf-8')).hexdigest()

    def with_overrides(self, **overrides):
        """Re-validate with command line overrides applied"""
        values = self.to_dict()
        values.update({k: v for k, v in overrides.items() if v is not None})
        raw = {key: _render(value) for key, value in values.items() if value is not None}
        return _load(raw)

    def get_summary(self):
        """Short summary for logs"""
        return {
            'd': self.d,
            'resolution': list(self.resolution_tuple),
            'eta': self.eta,
            'M': self.M,
            'T': self.T,
            'N': self.N,
            'config_hash': self.config_hash[:12],
        }

    def __repr__(self):
        return f"<ExperimentConfig(hash={self.config_hash[:12]})>"


def _render(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, Config.FLOAT_FORMAT)
    if isinstance(value, (list, tuple)):
        return ','.join(_render(v) for v in value)
    return str(value)


def _load(raw):
    try:
        data = ExperimentSchema().load(raw)
    except ValidationError as error:
        raise ConfigError('Invalid experiment configuration', errors=error.messages) from error
    return ExperimentConfig(**data)


def parse_experiment(text):
    """Parse key=value lines into an ExperimentConfig"""
    raw = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split('#', 1)[0].strip()
        if not stripped:
            continue
        if '=' not in stripped:
            raise ConfigError(f'Line {number} is not key=value', line=number)
        key, value = (part.strip() for part in stripped.split('=', 1))
        if key in raw:
            raise ConfigError(f'Duplicate key {key!r}', line=number)
        if value == '':
            continue
        raw[key] = value
    return _load(raw)


def load_experiment(path=None):
    """Load an experiment file, or the defaults when no path is given"""
    if path is None:
        return parse_experiment('')
    try:
        text = Path(path).read_text()
    except OSError as error:
        raise ConfigError(f'Cannot read config file {path}', path=str(path)) from error
    return parse_experiment(text)
