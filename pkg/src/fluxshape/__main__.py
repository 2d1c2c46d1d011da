from fluxshape.cli import entry_point

entry_point()
