from ...forms import FuseForm
from ...pipeline import run_fuse
from ...solvers import INIT_CHOICES
from ..base import FusionCommand, with_default
from ._options import add_fusion_inputs, add_solver_options, add_weight_options


class Command(FusionCommand):
    help = "Fuse a foreground into a background with the joint osmosis model."
    form_class = FuseForm

    def add_arguments(self, parser):
        add_fusion_inputs(parser)
        parser.add_argument("-o", "--output", required=True, help="fused image u (8-bit PNG)")
        parser.add_argument("--init", choices=INIT_CHOICES, default=INIT_CHOICES[0],
                            help=with_default("starting image for u"))
        parser.add_argument("--trace", help="write the per-iteration energy trace to this CSV file")
        parser.add_argument("--save-v", help="write the guide image v, rescaled to 0..255, to this PNG")
        add_weight_options(parser)
        add_solver_options(parser)

    def run(self, foreground, background, alpha, **options):
        config = self.validated_config((foreground, background, alpha), options)
        result, written = run_fuse(config)
        trace = result.trace
        final = trace.last.E if len(trace) else trace.initial.E
        self.stdout.write(
            f"{trace.stop_reason} after {len(trace)} iterations: E {trace.initial.E:.6e} -> {final:.6e}"
        )
        if trace.warnings:
            self.stdout.write(self.style.WARNING(
                f"inner solver stopped at its cap in {len(trace.warnings)} iterations"
            ))
        self.report(written)
