from .model import (  # noqa
    DirectionAtom,
    TessellationModel,
    EdgeRates,
    edge_rates,
    reduction_transform,
    standard_model,
    planar_model,
)
from .model_loaders import load_model, dump_model  # noqa
from .sampler import (  # noqa
    TypicalCell,
    SampleStreamSpec,
    sample_typical_cell,
    sample_stream,
    sample_array,
)
from .window import Window, WindowTessellation, sample_window_tessellation  # noqa
from .functionals import SizeFunctional, sigma, tau, size  # noqa
