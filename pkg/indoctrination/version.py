# _version.py is written by hatch-vcs at build time
try:
    from ._version import version
except ImportError:
    from importlib.metadata import PackageNotFoundError, version as _version

    try:
        version = _version("indoctrination")
    except PackageNotFoundError:
        version = "unknown.dev"
