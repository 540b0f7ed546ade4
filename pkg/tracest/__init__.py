from .version import __version__
from .kinds import Method, OperatorKind, ExitCode
from .helpers import TraceEstimationError
from .linop import (ImplicitOperator, DenseOperator, DiagonalOperator, SparseOperator, RankOneOperator,
                    GramOperator, LowRankOperator, CompositeOperator, matvec, exact_trace)
from .generators import GeneratorSpec, FAMILIES, generate
from .sampler import SeededStream, draw_probe, spawn_substream
from .estimator import TraceEstimate, estimate_trace, rayleigh_sample
from .specialfn import reg_gamma_p, reg_gamma_q
from .bounds import TolerancePair, BoundReport, bound_report, gaussian_necessary_min_n, phi
from .stats import MatrixDiagnostics, diagnose
from .harness import ExperimentRecord, MinSampleResult, success_probability, min_sample_size, run_figure
