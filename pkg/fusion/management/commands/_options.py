"""Option groups shared by several fusion commands; defaults come from the config dataclasses."""

from ...baselines import DRIFT_BLENDS, LINEAR_SOLVERS, SCHEMES, OsmosisEvolutionConfig
from ...energy import REGULARIZERS
from ...images import ModelWeights
from ...solvers import IPianoConfig, PDConfig
from ..base import with_default

WEIGHTS = ModelWeights()
IPIANO = IPianoConfig()
PRIMAL_DUAL = PDConfig()
EVOLUTION = OsmosisEvolutionConfig()


def add_fusion_inputs(parser):
    parser.add_argument("foreground", help="foreground image f (PNG/PPM/PGM)")
    parser.add_argument("background", help="background image b, aligned with f")
    parser.add_argument("alpha", help="alpha map; white selects the foreground")


def add_offset(parser):
    parser.add_argument("--offset", type=float, default=WEIGHTS.offset,
                        help=with_default("lower clamp applied to input intensities"))


def add_alpha_blur(parser):
    parser.add_argument("--alpha-blur", type=float, default=0.0, metavar="SIGMA",
                        help=with_default("standard deviation of the Gaussian applied to the alpha map"))


def add_weight_options(parser):
    group = parser.add_argument_group("model weights")
    group.add_argument("--eta", type=float, default=WEIGHTS.eta, help=with_default("regularizer weight"))
    group.add_argument("--mu", type=float, default=WEIGHTS.mu, help=with_default("weight tying v to f^alpha b^(1-alpha)"))
    group.add_argument("--gamma", type=float, default=WEIGHTS.gamma, help=with_default("data fidelity weight"))
    group.add_argument("--eps", type=float, default=WEIGHTS.eps, help=with_default("Huber threshold"))
    add_offset(group)
    add_alpha_blur(group)


def add_solver_options(parser):
    group = parser.add_argument_group("solver")
    group.add_argument("--beta1", type=float, default=IPIANO.beta1, help=with_default("inertia of the u block"))
    group.add_argument("--beta2", type=float, default=IPIANO.beta2, help=with_default("inertia of the v block"))
    group.add_argument(
        "--tol", type=float, default=IPIANO.tol,
        help=with_default("energy change, relative to max(|E|, |E0|), to stop at"),
    )
    group.add_argument("--maxiter", type=int, default=IPIANO.maxiter, help=with_default("outer iteration cap"))
    group.add_argument("--backtrack-maxiter", type=int, default=IPIANO.backtrack_maxiter,
                       help=with_default("Lipschitz backtracking trials per iteration"))
    group.add_argument("--inner-tol", type=float, default=PRIMAL_DUAL.inner_tol,
                       help=with_default("relative primal-dual gap of the v prox"))
    group.add_argument("--inner-maxiter", type=int, default=PRIMAL_DUAL.inner_maxiter,
                       help=with_default("primal-dual iteration cap"))
    group.add_argument("--regularizer", choices=REGULARIZERS, default=REGULARIZERS[0],
                       help=with_default("regularizer of v"))


def add_evolution_options(parser):
    group = parser.add_argument_group("osmosis evolution")
    group.add_argument("--time-step", type=float, default=EVOLUTION.time_step, help=with_default("time step tau"))
    group.add_argument("--final-time", type=float, default=EVOLUTION.final_time, help=with_default("stopping time T"))
    group.add_argument("--scheme", choices=SCHEMES, default=EVOLUTION.scheme, help=with_default("time discretization"))
    group.add_argument("--linear-solver", choices=LINEAR_SOLVERS, default=EVOLUTION.linear_solver,
                       help=with_default("solver of the implicit steps"))
    group.add_argument("--solver-tol", type=float, default=EVOLUTION.solver_tol,
                       help=with_default("relative residual of the iterative linear solver"))
    group.add_argument("--solver-maxiter", type=int, default=EVOLUTION.solver_maxiter,
                       help=with_default("iteration cap of the iterative linear solver"))
    group.add_argument("--drift-blend", choices=DRIFT_BLENDS, default=DRIFT_BLENDS[0],
                       help=with_default("how osmosis fusion mixes the drifts of f and b"))
