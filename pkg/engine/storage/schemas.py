"""
Marshmallow schemas turning models into report dictionaries
"""
from marshmallow import EXCLUDE, Schema, ValidationError, fields, post_load

from models.base import to_plain
from models.frame import Frame, FrameParams


def _complex_pairs(values):
    return [[float(v.real), float(v.imag)] for v in values]


class CheckReportSchema(Schema):
    """Named check with its status and metrics"""
    name = fields.String()
    status = fields.String()
    message = fields.String()
    metrics = fields.Method('dump_metrics')

    def dump_metrics(self, obj):
        return to_plain(obj.metrics)


class FrameSchema(Schema):
    """Frame parameters, coefficients and certificate; loads back into a Frame"""

    class Meta:
        unknown = EXCLUDE

    sigma = fields.Float(attribute='params.sigma', required=True)
    L = fields.Float(attribute='params.L', required=True)
    epsilon = fields.Float(attribute='params.epsilon', required=True)
    eta = fields.Float(attribute='params.eta', required=True)
    k = fields.Integer(attribute='params.k')
    mode = fields.String(attribute='params.mode')
    policy = fields.String(attribute='params.policy')
    epsilon0 = fields.Float(attribute='params.epsilon0', allow_none=True)
    delta = fields.Float(attribute='params.delta', allow_none=True)
    modes = fields.Integer(attribute='params.size', dump_only=True)
    x0 = fields.Method('dump_x0', deserialize='load_floats', required=True)
    indices = fields.Method('dump_indices', deserialize='load_raw', required=True)
    coefficients = fields.Method('dump_coefficients', deserialize='load_coefficients',
                                 required=True)
    error = fields.Float(allow_none=True, allow_nan=True)
    reference_norm = fields.Float(allow_none=True, allow_nan=True)
    relative_error = fields.Float(allow_none=True, dump_only=True)
    certified_decay = fields.Boolean()
    decay_constant = fields.Float(allow_none=True, allow_nan=True)
    decay_constant_small = fields.Float(attribute='decay_small', allow_none=True, allow_nan=True)
    ladder = fields.Method('dump_ladder', deserialize='load_raw')

    def dump_x0(self, obj):
        return obj.x0.tolist()

    def dump_indices(self, obj):
        return obj.indices.tolist()

    def dump_coefficients(self, obj):
        return _complex_pairs(obj.coefficients)

    def dump_ladder(self, obj):
        return to_plain(obj.ladder)

    def load_floats(self, value):
        return [float(v) for v in value]

    def load_raw(self, value):
        return value

    def load_coefficients(self, value):
        try:
            return [complex(float(re), float(im)) for re, im in value]
        except (TypeError, ValueError) as error:
            raise ValidationError('Coefficients must be [re, im] pairs.') from error

    @post_load
    def make_frame(self, data, **kwargs):
        params = FrameParams(indices=data.pop('indices'), **data.pop('params'))
        return Frame(params, data.pop('x0'), data.pop('coefficients'), **data)


class DesignReportSchema(Schema):
    """Relaxed optimiser with its weights and duality certificate"""
    value = fields.Float()
    gap = fields.Float()
    lam = fields.Float(data_key='lambda')
    lower = fields.Float()
    upper = fields.Float()
    N = fields.Integer(allow_none=True)
    iterations = fields.Integer()
    converged = fields.Boolean()
    polished = fields.Boolean()
    degenerate = fields.Boolean()
    argmin = fields.Method('dump_argmin')
    alpha = fields.Method('dump_alpha')
    measure = fields.Method('dump_measure')
    fractional_cells = fields.Method('dump_fractional')

    def dump_argmin(self, obj):
        return None if obj.argmin is None else list(obj.argmin)

    def dump_alpha(self, obj):
        return [{'index': list(index), 'weight': float(weight)}
                for index, weight in zip(obj.alpha.indices, obj.alpha.alpha)]

    def dump_measure(self, obj):
        return obj.a.measure

    def dump_fractional(self, obj):
        return obj.a.fractional_cells()


class ObservabilityReportSchema(Schema):
    """Observability constants side by side"""
    c_rand_packets = fields.Float()
    c_rand_packets_index = fields.List(fields.Integer(), allow_none=True)
    c_det_pencil = fields.Float(allow_none=True)
    c_rand_spectral = fields.Float()
    c_rand_spectral_mode = fields.List(fields.Integer(), allow_none=True)
    c_det_spectral = fields.Float(allow_none=True)
    c_true_samples = fields.List(fields.Float())
    sandwich = fields.Nested(CheckReportSchema, allow_none=True)


class PencilSidecarSchema(Schema):
    """Everything about a pencil except the matrices"""
    size = fields.Integer()
    T = fields.Float()
    sigma = fields.Float()
    L = fields.Float()
    x0 = fields.List(fields.Float())
    indices = fields.List(fields.List(fields.Integer()))
    mask_hash = fields.String(allow_none=True)
