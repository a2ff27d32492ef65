# This file is used to configure the behavior of pytest when using the Astropy
# test infrastructure.
import os

from pytest_astropy_header.display import PYTEST_HEADER_MODULES, TESTED_VERSIONS


def pytest_configure(config):
    config.option.astropy_header = True

    # Only report the packages the solver actually depends on
    for unused in ("h5py", "Matplotlib", "Pandas"):
        PYTEST_HEADER_MODULES.pop(unused, None)
    PYTEST_HEADER_MODULES["astropy"] = "astropy"
    PYTEST_HEADER_MODULES["pydantic"] = "pydantic"

    from .version import version

    packagename = os.path.basename(os.path.dirname(__file__))
    TESTED_VERSIONS[packagename] = version
