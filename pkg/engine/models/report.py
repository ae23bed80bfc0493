"""
Check and observability reports
"""
from .base import BaseModel


class CheckStatus:
    """Outcome of a numerical check"""
    PASSED = 'passed'
    FAILED = 'failed'
    SKIPPED = 'skipped'


class CheckReport(BaseModel):
    """Measured quantity against its bound"""
    __fields__ = ('name', 'status', 'metrics', 'message')

    def __init__(self, name, passed=True, metrics=None, message='', skipped=False):
        self.name = name
        if skipped:
            self.status = CheckStatus.SKIPPED
        else:
            self.status = CheckStatus.PASSED if passed else CheckStatus.FAILED
        self.metrics = metrics or {}
        self.message = message

    @property
    def passed(self):
        return self.status != CheckStatus.FAILED

    def __getitem__(self, key):
        return self.metrics[key]

    def get(self, key, default=None):
        return self.metrics.get(key, default)


class ObservabilityReport(BaseModel):
    """Approximate observability constants side by side"""
    __fields__ = ('c_rand_packets', 'c_rand_packets_index', 'c_det_pencil', 'c_rand_spectral',
                  'c_rand_spectral_mode', 'c_det_spectral', 'c_true_samples', 'sandwich')

    def __init__(self, c_rand_packets, c_det_pencil, c_rand_spectral, c_true_samples=None,
                 sandwich=None, c_rand_packets_index=None, c_rand_spectral_mode=None,
                 c_det_spectral=None):
        self.c_rand_packets = c_rand_packets
        self.c_rand_packets_index = c_rand_packets_index
        self.c_det_pencil = c_det_pencil
        self.c_rand_spectral = c_rand_spectral
        self.c_rand_spectral_mode = c_rand_spectral_mode
        self.c_det_spectral = c_det_spectral
        self.c_true_samples = c_true_samples or []
        self.sandwich = sandwich

    def get_summary(self):
        """Get summary of the constants"""
        return {
            'c_rand_packets': self.c_rand_packets,
            'c_det_pencil': self.c_det_pencil,
            'c_rand_spectral': self.c_rand_spectral,
            'c_det_spectral': self.c_det_spectral,
            'sandwich': None if self.sandwich is None else self.sandwich.status,
        }
