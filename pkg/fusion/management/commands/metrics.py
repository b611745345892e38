from ...forms import MetricsForm
from ...pipeline import run_metrics
from ..base import FusionCommand
from ._options import add_offset


class Command(FusionCommand):
    help = "Chromaticity error between two RGB images, as CSV rows metric,channel,value."
    form_class = MetricsForm

    def add_arguments(self, parser):
        parser.add_argument("first")
        parser.add_argument("second")
        parser.add_argument("-o", "--output", help="CSV file to write (default: standard output)")
        add_offset(parser)

    def run(self, first, second, **options):
        config = self.validated_config((first, second), options)
        run_metrics(config, self.stdout)
        if config.metrics:
            self.report([config.metrics])
