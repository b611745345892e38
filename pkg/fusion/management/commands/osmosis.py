from ...forms import OsmosisForm
from ...pipeline import run_osmosis
from ..base import FusionCommand
from ._options import add_alpha_blur, add_evolution_options, add_offset


class Command(FusionCommand):
    help = (
        "Linear osmosis baseline. With two inputs, evolve the first image under the drift "
        "of the second; with foreground, background and alpha map, run osmosis fusion."
    )
    form_class = OsmosisForm

    def add_arguments(self, parser):
        parser.add_argument("inputs", nargs="+", metavar="IMAGE",
                            help="INITIAL GUIDE, or FOREGROUND BACKGROUND ALPHA")
        parser.add_argument("-o", "--output", required=True, help="evolved image (8-bit PNG)")
        add_offset(parser)
        add_alpha_blur(parser)
        add_evolution_options(parser)

    def run(self, inputs, **options):
        config = self.validated_config(inputs, options)
        result, written = run_osmosis(config)
        drift = abs(result.means[-1] - result.means[0]).max()
        self.stdout.write(
            f"{len(result.means) - 1} steps, largest change of a channel mean {drift:.3e}, "
            f"smallest value {result.minima.min():.6g}"
        )
        self.report(written)
