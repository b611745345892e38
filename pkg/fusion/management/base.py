import logging
import sys

from django.core.management.base import BaseCommand, CommandError

from ..exceptions import ConvergenceError, FusionError, NumericalError, PositivityError

# exit status of a run that failed numerically; usage problems exit with 1
NUMERIC_FAILURE = 2
NUMERIC_ERRORS = (ConvergenceError, NumericalError, PositivityError)

VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}


def with_default(text):
    return f"{text} (default: %(default)s)"


def form_error_message(form):
    messages = []
    for name, errors in form.errors.as_data().items():
        text = " ".join(message for error in errors for message in error.messages)
        messages.append(text if name == "__all__" else f"--{name.replace('_', '-')}: {text}")
    return "; ".join(messages)


class FusionCommand(BaseCommand):
    """
    Shared plumbing of the fusion commands.

    Argument errors raise ``CommandError`` (exit status 1) instead of
    argparse's exit status 2, which is reserved for numeric failures.
    Subclasses implement ``run``.
    """

    form_class = None

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(str(exc))
            sys.exit(exc.returncode)

    def configure_logging(self, verbosity):
        # verbosity 1 keeps the level from settings
        if verbosity != 1:
            logging.getLogger("fusion").setLevel(VERBOSITY_LEVELS.get(verbosity, logging.DEBUG))

    def validated_config(self, inputs, options):
        form = self.form_class(options, inputs=inputs)
        if not form.is_valid():
            raise CommandError(form_error_message(form))
        return form.run_config()

    def handle(self, *args, **options):
        self.configure_logging(options["verbosity"])
        try:
            return self.run(**options)
        except NUMERIC_ERRORS as exc:
            raise CommandError(str(exc), returncode=NUMERIC_FAILURE) from exc
        except (FusionError, OSError, ValueError) as exc:
            raise CommandError(str(exc)) from exc

    def run(self, **options):
        raise NotImplementedError("subclasses of FusionCommand must provide a run() method")

    def report(self, paths):
        for path in paths:
            self.stdout.write(self.style.SUCCESS(f"wrote {path}"))
