from pathlib import Path

from django.conf import settings

from ...forms import SweepForm
from ...pipeline import run_sweep
from ..base import FusionCommand, with_default
from ._options import add_fusion_inputs, add_solver_options, add_weight_options


class Command(FusionCommand):
    help = "Fuse over a grid of (eta, mu, gamma) weights and initializations and summarize the energies."
    form_class = SweepForm

    def add_arguments(self, parser):
        add_fusion_inputs(parser)
        parser.add_argument("--etas", default="0,0.1,0.5", help=with_default("comma-separated eta values"))
        parser.add_argument("--mus", default="10,100", help=with_default("comma-separated mu values"))
        parser.add_argument("--gammas", default="0,1", help=with_default("comma-separated gamma values"))
        parser.add_argument("--inits", default="f", help=with_default("comma-separated initializations"))
        parser.add_argument("--output-dir",
                            help="directory for the fused images and summary.csv "
                                 "(default: FUSION['SWEEP_OUTPUT_DIR'] from settings)")
        add_weight_options(parser)
        add_solver_options(parser)

    def run(self, foreground, background, alpha, **options):
        config = self.validated_config((foreground, background, alpha), options)
        output_dir = Path(options.get("output_dir") or settings.FUSION["SWEEP_OUTPUT_DIR"])

        def on_cell(row):
            eta, mu, gamma, init, e0, e_final, iterations, converged = row
            status = "converged" if converged else "maxiter"
            self.stdout.write(
                f"eta={eta:g} mu={mu:g} gamma={gamma:g} init={init}: "
                f"E {e0:.6e} -> {e_final:.6e} ({status}, {iterations} iterations)"
            )

        run_sweep(config, output_dir, on_cell=on_cell)
        self.report([output_dir / "summary.csv"])
