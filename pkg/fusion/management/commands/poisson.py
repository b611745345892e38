from ...forms import PoissonForm
from ...pipeline import run_poisson
from ..base import FusionCommand


class Command(FusionCommand):
    help = "Seamless cloning baseline: paste the gradients of the foreground inside the mask."
    form_class = PoissonForm

    def add_arguments(self, parser):
        parser.add_argument("foreground")
        parser.add_argument("background")
        parser.add_argument("mask", help="binary mask; white pixels are taken from the foreground")
        parser.add_argument("-o", "--output", required=True, help="edited image (8-bit PNG)")

    def run(self, foreground, background, mask, **options):
        config = self.validated_config((foreground, background, mask), options)
        _, written = run_poisson(config)
        self.report(written)
