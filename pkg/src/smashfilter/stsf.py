"""Spatio-temporal smashed filtering: correlation straight from measurements."""
from dataclasses import dataclass, field

from .errors import DimensionError, OrderError
from .sensing import backproject
from .volume import correlate3, correlate3_many, temporal_derivative


@dataclass
class FilterBank:
    filters: list
    actions: list = field(default_factory=list)

    def __post_init__(self):
        if not self.actions:
            seen = []
            for f in self.filters:
                if f.label not in seen:
                    seen.append(f.label)
            self.actions = seen
        missing = {f.label for f in self.filters} - set(self.actions)
        if missing:
            raise ValueError(f"filter labels {sorted(missing)} not in action list")

    @property
    def filter_to_action(self):
        return [self.actions.index(f.label) for f in self.filters]

    def __len__(self):
        return len(self.filters)


def _check_fits(frame_dims, frames, f):
    L, M, N = f.dims
    P, Q = frame_dims
    if L > P or M > Q or N > frames:
        raise DimensionError(f"filter {f.dims} does not fit inside {(P, Q, frames)}")


def smashed_response(z, f, m=None):
    """Compressed-domain response sum_t <phi S_{n+t}, phi H^{l,m,t}>.

    Evaluated as correlate3(phi^T Z, H); the two are equal because
    <phi a, phi b> = <phi^T phi a, b>.
    """
    if z.derivative_order != 1:
        raise OrderError("smashed_response expects temporally differenced measurements")
    _check_fits(z.frame_dims, z.frames, f)
    return correlate3(backproject(z, m), f.volume, provenance="smashed")


def oracle_response(v, f):
    """Uncompressed reference: correlate3(temporal_derivative(v), H)."""
    d = temporal_derivative(v)
    _check_fits(d.shape[:2], d.shape[2], f)
    return correlate3(d, f.volume, provenance="oracle")


def response_bank(z, bank, m=None, lifted=None):
    """One smashed response per filter, in bank order."""
    if z.derivative_order != 1:
        raise OrderError("response_bank expects temporally differenced measurements")
    for f in bank.filters:
        _check_fits(z.frame_dims, z.frames, f)
    lifted = backproject(z, m) if lifted is None else lifted
    return correlate3_many(lifted, [f.volume for f in bank.filters], provenance="smashed")


def oracle_bank(v, bank):
    d = temporal_derivative(v)
    for f in bank.filters:
        _check_fits(d.shape[:2], d.shape[2], f)
    return correlate3_many(d, [f.volume for f in bank.filters], provenance="oracle")
