"""
Validated experiment parameters with per-experiment defaults.
"""
from dataclasses import asdict, dataclass

EXPERIMENTS = ("pathlen_sweep", "timing_sweep", "metric_hist", "kernel_sv", "sharpness", "kahan")

DEFAULT_KERNELS = (
    ("runge", 1.0, 0),
    ("runge", 10.0, 0),
    ("runge", 100.0, 0),
    ("wendland", 1.0, 0),
    ("wendland", 1.0, 1),
    ("wendland", 1.0, 3),
    ("runge_ring", 1.0, 0),
)

DEFAULTS = {
    "pathlen_sweep": {"trials": 2000, "dims": (11, 11), "k": 3, "gamma": 1.0},
    "timing_sweep": {"trials": 1, "dims": (500, 500), "k_values": (50, 150, 300, 500)},
    "metric_hist": {"trials": 500, "dims": (50, 50), "k": 20},
    "kernel_sv": {"trials": 1, "dims": (300, 300), "k": 5, "kernels": DEFAULT_KERNELS},
    "sharpness": {"trials": 1, "dims": (20, 20), "k": 5, "gamma": 1.0},
    "kahan": {"trials": 1, "dims": (10, 10), "s": 0.6},
}


@dataclass(frozen=True)
class ExperimentSpec:
    """
    Parameters of one experiment run. Fields left as ``None`` take the experiment's defaults.

    :param name: One of ``EXPERIMENTS``.
    :param trials: Number of trials (sampled starts for ``pathlen_sweep``).
    :param dims: Matrix shape ``(m, n)``; for ``kernel_sv`` the grid size, for ``kahan`` ``(n, n)``.
    :param k: Pivot size.
    :param gamma: Search gamma where the experiment runs a search (GE 3 / QR 2 when ``None``).
    :param seed: Base seed; trial ``t`` draws from ``SeedSequence([seed, t])``.
    :param full: ``pathlen_sweep`` only: start from every node instead of sampling.
    :param workers: Worker processes for independent trials.
    :param k_values: ``timing_sweep`` only: the sizes to time.
    :param kernels: ``kernel_sv`` only: ``(kernel, beta, s)`` triples.
    :param s: ``kahan`` only: the sine parameter.
    """

    name: str
    trials: int = None
    dims: tuple = None
    k: int = None
    gamma: float = None
    seed: int = 0
    full: bool = False
    workers: int = 1
    k_values: tuple = None
    kernels: tuple = None
    s: float = None

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"Unknown experiment {self.name!r}; choose from {EXPERIMENTS}")
        for key, value in DEFAULTS[self.name].items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, value)
        if self.dims is not None:
            object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        self._validate()

    def _validate(self):
        if self.trials is not None and self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.dims is not None and (len(self.dims) != 2 or min(self.dims) < 1):
            raise ValueError(f"dims must be two positive sizes, got {self.dims}")
        if self.k is not None and not 1 <= self.k <= min(self.dims):
            raise ValueError(f"k must be in [1, {min(self.dims)}], got {self.k}")
        if self.gamma is not None and not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.k_values is not None and any(not 1 <= k <= min(self.dims) for k in self.k_values):
            raise ValueError(f"k_values must lie in [1, {min(self.dims)}], got {self.k_values}")
        if self.s is not None and not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.name == "sharpness" and self.k < 2:
            raise ValueError("The sharpness experiment needs k >= 2")

    @property
    def stem(self):
        """Parameter-stamped file stem shared by every artifact of this run."""
        parts = [self.name, f"m{self.dims[0]}", f"n{self.dims[1]}"]
        if self.k is not None:
            parts.append(f"k{self.k}")
        if self.gamma is not None:
            parts.append(f"g{self.gamma:g}")
        if self.s is not None:
            parts.append(f"s{self.s:g}")
        parts.append("full" if self.full else f"t{self.trials}")
        parts.append(f"seed{self.seed}")
        return "_".join(parts)

    def to_dict(self):
        payload = asdict(self)
        payload["dims"] = list(self.dims)
        if self.k_values is not None:
            payload["k_values"] = list(self.k_values)
        if self.kernels is not None:
            payload["kernels"] = [list(kernel) for kernel in self.kernels]
        return payload
