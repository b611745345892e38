from ...forms import BlendForm
from ...pipeline import run_blend
from ..base import FusionCommand
from ._options import add_alpha_blur, add_fusion_inputs


class Command(FusionCommand):
    help = "Direct alpha composite alpha*f + (1-alpha)*b."
    form_class = BlendForm

    def add_arguments(self, parser):
        add_fusion_inputs(parser)
        parser.add_argument("-o", "--output", required=True, help="composite image (8-bit PNG)")
        add_alpha_blur(parser)

    def run(self, foreground, background, alpha, **options):
        config = self.validated_config((foreground, background, alpha), options)
        _, written = run_blend(config)
        self.report(written)
