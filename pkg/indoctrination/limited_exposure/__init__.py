# Licensed under a 3-clause BSD style license - see LICENSE.rst

from .solver import *
from .polarization import *
