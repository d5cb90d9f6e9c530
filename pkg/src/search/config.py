"""
Search configuration and the report a maxvol search produces.
"""
import json
import os
from dataclasses import dataclass, field

from src.core.dense import Selection

SCHEMA_VERSION = 1
DEFAULT_TIE_TOL = 1e-10
DEFAULT_GE_GAMMA = 3.0
DEFAULT_QR_GAMMA = 2.0
RANDOM_START_ATTEMPTS = 50


@dataclass(frozen=True)
class InitStrategy:
    """
    Where a search starts: the greedy pivot (GECP / CPQR), a given selection, or a seeded random one.
    """

    kind: str = "greedy"
    selection: Selection = None
    seed: int = None

    def __post_init__(self):
        if self.kind not in ("greedy", "given", "random"):
            raise ValueError(f"Unknown init strategy: {self.kind!r}")
        if self.kind == "given" and self.selection is None:
            raise ValueError("The 'given' init strategy needs a selection")
        if self.kind == "random" and self.seed is None:
            raise ValueError("The 'random' init strategy needs a seed")

    @classmethod
    def greedy(cls):
        return cls("greedy")

    @classmethod
    def given(cls, selection):
        return cls("given", selection=selection)

    @classmethod
    def random(cls, seed):
        return cls("random", seed=int(seed))


@dataclass(frozen=True)
class SearchConfig:
    """
    Parameters of a (near-)local maximum volume search.

    :param gamma: Acceptance factor, ``>= 1``. ``1`` searches for a local maximum,
        larger values for a gamma-local one.
    :param init: Starting point of the search.
    :param max_swaps: Cap on accepted swaps; ``None`` picks the mode's default.
    :param tie_tol: Relative slack on the strict inequality ``ratio > gamma``.
    :param growth_factor: GECP growth constant used in the reported GE path bound;
        ``None`` uses the Wilkinson bound.
    """

    gamma: float = 1.0
    init: InitStrategy = field(default_factory=InitStrategy.greedy)
    max_swaps: int = None
    tie_tol: float = DEFAULT_TIE_TOL
    growth_factor: float = None

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.max_swaps is not None and self.max_swaps < 1:
            raise ValueError(f"max_swaps must be >= 1, got {self.max_swaps}")
        if not self.tie_tol >= 0.0:
            raise ValueError(f"tie_tol must be nonnegative, got {self.tie_tol}")
        if self.growth_factor is not None and not self.growth_factor >= 1.0:
            raise ValueError(f"growth_factor must be >= 1, got {self.growth_factor}")

    @property
    def threshold(self):
        """Smallest ratio that counts as an improvement."""
        return self.gamma * (1.0 + self.tie_tol)


@dataclass(frozen=True)
class SwapRecord:
    move: object
    ratio: float
    log_volume_before: float
    log_volume_after: float

    def to_dict(self):
        return {
            "move": self.move.to_dict(),
            "ratio": self.ratio,
            "log_volume_before": self.log_volume_before,
            "log_volume_after": self.log_volume_after,
        }


@dataclass(frozen=True)
class SearchReport:
    """
    Outcome of one search: the path it walked and the certificate at its end.

    ``certified_gamma`` is the largest neighbour volume ratio at the final
    selection (0 when the selection has no neighbours).
    """

    mode: str
    k: int
    gamma: float
    swaps: tuple
    certified_gamma: float
    start_log_volume: float
    end_log_volume: float
    start_selection: Selection
    selection: Selection
    max_swaps: int
    path_bound: float = None

    @property
    def path_length(self):
        return len(self.swaps)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "k": self.k,
            "gamma": self.gamma,
            "path_length": self.path_length,
            "certified_gamma": self.certified_gamma,
            "start_log_volume": self.start_log_volume,
            "end_log_volume": self.end_log_volume,
            "start_selection": self.start_selection.to_dict(),
            "selection": self.selection.to_dict(),
            "max_swaps": self.max_swaps,
            "path_bound": self.path_bound,
        }

    def to_jsonl(self, path):
        """
        Writes one JSON record per accepted swap followed by a summary record.

        :param path: Destination ``.jsonl`` file.
        :return: The path written.
        """
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as handle:
            for step, record in enumerate(self.swaps):
                payload = {"schema_version": SCHEMA_VERSION, "record": "swap", "step": step}
                payload.update(record.to_dict())
                handle.write(json.dumps(payload) + "\n")
            summary = {"record": "summary"}
            summary.update(self.to_dict())
            handle.write(json.dumps(summary) + "\n")
        return path
