"""Bundled benchmark programs."""

from importlib import resources

NAMES = ("is_list", "edit", "create_list", "path")


def source(name):
    """Text of the bundled program ``name``."""
    if name not in NAMES:
        raise KeyError(f"no bundled program {name!r}; choose from {', '.join(NAMES)}")
    return resources.files(__name__).joinpath(name + ".pl").read_text()
