# Objects that hold the settings of a single command-line run.

import math
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, Field, confloat, conint, root_validator, validator

from ..core import SIMPLEX_TOL, OpinionConfig

__all__ = ["Command", "OutputFormat", "RunConfig"]

DEFAULT_GRID = (0.01, 1.0, 100)
DEFAULT_PI0 = (1 / 3, 1 / 3, 1 / 3)


class Command(str, Enum):
    """
    Sub-commands of the ``indoctrination`` command-line tool.
    """

    EQUILIBRIUM = "equilibrium"
    LIMITED = "limited"
    SWEEP = "sweep"
    PROCESS = "process"
    VERIFY = "verify"


class OutputFormat(str, Enum):
    """
    Formats results can be written in.
    """

    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """
    Settings for one run of the command-line tool.

    Parameters
    ----------

    command : `Command`
        What to compute.

    opinions : tuple of float, optional
        Opinion values; required by ``equilibrium``.

    sizes : tuple of int, optional
        Group sizes; required by ``equilibrium``, optional for ``limited``
        (three entries, default one player per opinion).

    delta : float, optional
        Exposure level in ``(0, 1]``; required by ``limited`` and ``process``
        (which needs it below 1).

    grid : tuple
        ``(start, stop, steps)`` of the ``sweep`` grid.

    pi0 : tuple of float, optional
        Initial population shares for ``process``; all positive.

    tol : float
        Solver tolerance: on ``W`` for ``limited`` and ``sweep``, on the
        L1 step of the process for ``process``.

    max_iter : int
        Iteration limit of the solver.

    format : `OutputFormat`
        Output format.

    input : path, optional
        JSON file written by ``equilibrium`` or ``limited``; required by
        ``verify``.

    certification_tol : float
        Largest deviation gain ``verify`` accepts.

    logfile : path, optional
        File diagnostics are logged to in addition to the console.

    Examples
    --------
    >>> config = RunConfig(command="sweep", grid=(0.1, 1, 10))
    >>> config.command, config.format
    (<Command.SWEEP: 'sweep'>, <OutputFormat.JSON: 'json'>)
    """

    command: Command
    opinions: tuple[float, ...] | None = None
    sizes: tuple[int, ...] | None = None
    delta: confloat(gt=0, le=1) | None = None
    grid: tuple[confloat(gt=0, le=1), confloat(gt=0, le=1), conint(ge=1)] = Field(
        default=DEFAULT_GRID, description="start, stop and number of steps"
    )
    pi0: tuple[float, float, float] | None = None
    tol: confloat(gt=0) = 1e-12
    max_iter: conint(ge=1) = 1000000
    format: OutputFormat = OutputFormat.JSON
    input: Path | None = None
    certification_tol: confloat(gt=0) = 1e-6
    logfile: Path | None = None

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @validator("grid")
    @classmethod
    def validate_grid(cls, v):
        start, stop, steps = v
        if steps > 1 and start >= stop:
            raise ValueError(f"Grid start ({start}) must be below its stop ({stop}).")
        return v

    @validator("pi0")
    @classmethod
    def validate_pi0(cls, v):
        if v is None:
            return v
        if any(p <= 0 for p in v):
            raise ValueError(f"Every initial share must be positive, got {v}.")
        if abs(math.fsum(v) - 1) > SIMPLEX_TOL:
            raise ValueError(f"Initial shares must sum to 1, got {math.fsum(v)}.")
        return v

    # When the switch to pydantic v2 happens, this root_validator will need
    # to be replaced by a model_validator decorator.
    @root_validator(skip_on_failure=True)
    @classmethod
    def validate_command_inputs(cls, values):
        command = values["command"]
        needed = {
            Command.EQUILIBRIUM: ("opinions", "sizes"),
            Command.LIMITED: ("delta",),
            Command.PROCESS: ("delta",),
            Command.VERIFY: ("input",),
        }.get(command, ())
        missing = [name for name in needed if values.get(name) is None]
        if missing:
            raise ValueError(f"The {command.value} command needs {', '.join(missing)}.")

        if command == Command.EQUILIBRIUM:
            # Raises if the opinions and sizes do not make a valid configuration
            OpinionConfig(opinions=values["opinions"], sizes=values["sizes"])
        elif values.get("opinions") is not None:
            raise ValueError(f"The {command.value} command does not take opinions.")

        if values.get("sizes") is not None and command == Command.LIMITED:
            sizes = values["sizes"]
            if len(sizes) != 3 or any(size < 1 for size in sizes):
                raise ValueError(
                    f"The limited command needs three positive sizes, got {sizes}."
                )
        if command == Command.PROCESS and values["delta"] == 1:
            raise ValueError("The process command needs delta below 1.")
        return values

    @property
    def limited_sizes(self):
        return self.sizes if self.sizes is not None else (1, 1, 1)

    @property
    def initial_shares(self):
        return self.pi0 if self.pi0 is not None else DEFAULT_PI0
