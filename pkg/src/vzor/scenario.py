"""Scenario configuration: a flat key = value file describing one run.

Every knob of a simulation lives here so that (file, seed) fully
determines the output.  ``parse_config`` and ``canonical_text`` round
trip: the canonical echo written next to each run's outputs parses back
into an identical scenario.

Stake and slash amounts are written in ETH (decimal text) and held
internally in integer wei.  Governance updates are scheduled as
``param:value@epoch`` items; governed amounts (s_cut, S_min) also use
ETH text.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation

from .errors import ConfigError, InvalidScenario
from .hub import GOVERNED_PARAMETERS, GovernedParams, eth_to_wei, wei_to_eth_text
from .oracle import AggregationParams

BEHAVIORS = ("honest", "wrong_value", "wrong_median_packet", "withhold")

_KNOWN_CHAINS = ("sepolia", "scroll")


@dataclass(frozen=True)
class GovernanceItem:
    parameter: str
    value: int  # wei for s_cut / S_min, plain count for f_min / n
    at_epoch: int


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 42
    epochs: int = 480
    epoch_interval_s: float = 30.0
    registry_size: int = 50
    committee_size: int = 15
    quorum: int = 10
    value_min: int = 1
    value_max: int = 10**12
    value_base: int = 200_000_000_000
    value_walk_max: int = 100_000_000
    noise_max: int = 1_000_000
    delta_net_min_s: float = 0.1
    delta_net_max_s: float = 2.0
    t_prove_s: float = 0.83
    chains: tuple[str, ...] = ("sepolia", "scroll")
    adversary_behavior: str = "honest"
    adversary_count: int = 0
    fraud_period: int = 60
    initial_stake_wei: int = 32 * 10**18
    min_stake_wei: int = 10**18
    slash_cut_wei: int = 15 * 10**16
    governance_delay_epochs: int = 2
    governance: tuple[GovernanceItem, ...] = field(default_factory=tuple)

    # -- derived views ---------------------------------------------------------

    @property
    def epoch_interval_ms(self) -> int:
        return round(self.epoch_interval_s * 1000)

    @property
    def delta_net_min_ms(self) -> int:
        return round(self.delta_net_min_s * 1000)

    @property
    def delta_net_max_ms(self) -> int:
        return round(self.delta_net_max_s * 1000)

    @property
    def t_prove_ms(self) -> int:
        return round(self.t_prove_s * 1000)

    def controlled_ids(self) -> frozenset[int]:
        # adversary controls the first b reporter ids
        return frozenset(range(self.adversary_count))

    def genesis_governed(self) -> GovernedParams:
        return GovernedParams(
            f_min=self.quorum,
            s_cut=self.slash_cut_wei,
            n=self.committee_size,
            s_min=self.min_stake_wei,
        )

    def aggregation_params(self, governed: GovernedParams) -> AggregationParams:
        return AggregationParams(
            quorum=governed.f_min,
            committee_size=governed.n,
            value_min=self.value_min,
            value_max=self.value_max,
        )

    # -- validation -------------------------------------------------------------

    def validate(self) -> None:
        """Raise InvalidScenario on any cross-field inconsistency."""
        if not 0 <= self.seed < 2**64:
            raise InvalidScenario("seed must fit in 64 bits")
        if self.epochs < 1:
            raise InvalidScenario("need at least one epoch")
        if self.epoch_interval_s <= 0:
            raise InvalidScenario("epoch interval must be positive")
        if not 1 <= self.quorum <= self.committee_size <= self.registry_size:
            raise InvalidScenario(
                f"need 1 <= quorum ({self.quorum}) <= committee ({self.committee_size})"
                f" <= registry ({self.registry_size})"
            )
        if not self.chains:
            raise InvalidScenario("need at least one destination chain")
        if len(set(self.chains)) != len(self.chains):
            raise InvalidScenario("duplicate chain ids")
        for chain in self.chains:
            if chain not in _KNOWN_CHAINS:
                raise InvalidScenario(f"unknown chain profile {chain!r}")
        if not self.value_min <= self.value_base <= self.value_max:
            raise InvalidScenario("value_base outside [value_min, value_max]")
        if self.value_walk_max < 0 or self.noise_max < 0:
            raise InvalidScenario("walk and noise bounds must be non-negative")
        if not 0 <= self.delta_net_min_s <= self.delta_net_max_s:
            raise InvalidScenario("need 0 <= delta_net_min <= delta_net_max")
        if self.t_prove_s < 0:
            raise InvalidScenario("proving time cannot be negative")
        if self.adversary_behavior not in BEHAVIORS:
            raise InvalidScenario(f"unknown adversary behavior {self.adversary_behavior!r}")
        if not 0 <= self.adversary_count <= self.registry_size:
            raise InvalidScenario("adversary count must fit in the registry")
        if self.fraud_period < 1:
            raise InvalidScenario("fraud period must be at least 1")
        if self.min_stake_wei < 1 or self.slash_cut_wei < 1:
            raise InvalidScenario("stake minimum and slash cut must be positive")
        if self.initial_stake_wei < self.min_stake_wei:
            raise InvalidScenario("initial stake below registration minimum")
        if self.governance_delay_epochs < 0:
            raise InvalidScenario("governance delay cannot be negative")
        # replay the governance timeline so a mid-run update cannot create
        # an inconsistent parameter set
        governed = self.genesis_governed()
        timeline = sorted(
            enumerate(self.governance),
            key=lambda pair: (pair[1].at_epoch + self.governance_delay_epochs, pair[0]),
        )
        for _, item in timeline:
            if item.parameter not in GOVERNED_PARAMETERS:
                raise InvalidScenario(f"{item.parameter!r} is not governed")
            if item.at_epoch < 0:
                raise InvalidScenario("governance proposals need a non-negative epoch")
            if item.value < 1:
                raise InvalidScenario("governed values must be positive")
            governed = governed.with_update(item.parameter, item.value)
            if not 1 <= governed.f_min <= governed.n <= self.registry_size:
                raise InvalidScenario(
                    f"governance at epoch {item.at_epoch} breaks quorum/committee bounds"
                )


# -- text format ----------------------------------------------------------------

_INT_KEYS = (
    "seed",
    "epochs",
    "registry_size",
    "committee_size",
    "quorum",
    "value_min",
    "value_max",
    "value_base",
    "value_walk_max",
    "noise_max",
    "adversary_count",
    "fraud_period",
    "governance_delay_epochs",
)
_FLOAT_KEYS = ("epoch_interval_s", "delta_net_min_s", "delta_net_max_s", "t_prove_s")
_ETH_KEYS = {
    "initial_stake_eth": "initial_stake_wei",
    "min_stake_eth": "min_stake_wei",
    "slash_cut_eth": "slash_cut_wei",
}


def _parse_governance_value(parameter: str, text: str) -> int:
    if parameter in ("s_cut", "S_min"):
        return eth_to_wei(text)
    return int(text)


def _governance_value_text(parameter: str, value: int) -> str:
    if parameter in ("s_cut", "S_min"):
        return wei_to_eth_text(value)
    return str(value)


def _parse_governance(text: str) -> tuple[GovernanceItem, ...]:
    items = []
    for piece in text.split(";"):
        piece = piece.strip()
        if not piece:
            continue
        try:
            head, at_text = piece.rsplit("@", 1)
            parameter, value_text = head.split(":", 1)
            items.append(
                GovernanceItem(
                    parameter=parameter.strip(),
                    value=_parse_governance_value(parameter.strip(), value_text.strip()),
                    at_epoch=int(at_text),
                )
            )
        except (ValueError, InvalidOperation) as exc:
            raise ConfigError(f"bad governance item {piece!r}: {exc}") from exc
    return tuple(items)


def parse_config(text: str) -> ScenarioConfig:
    """Parse the flat key = value format; unknown keys are errors."""
    config = ScenarioConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            if key in _INT_KEYS:
                config = replace(config, **{key: int(value)})
            elif key in _FLOAT_KEYS:
                config = replace(config, **{key: float(value)})
            elif key in _ETH_KEYS:
                config = replace(config, **{_ETH_KEYS[key]: eth_to_wei(value)})
            elif key == "chains":
                parts = tuple(c.strip() for c in value.split(",") if c.strip())
                config = replace(config, chains=parts)
            elif key == "adversary_behavior":
                config = replace(config, adversary_behavior=value)
            elif key == "governance":
                config = replace(config, governance=_parse_governance(value))
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except (ValueError, InvalidOperation) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return config


def canonical_text(config: ScenarioConfig) -> str:
    """Full configuration echo, defaults included; parses back identically."""
    governance = ";".join(
        f"{item.parameter}:{_governance_value_text(item.parameter, item.value)}@{item.at_epoch}"
        for item in config.governance
    )
    lines = [
        "# effective scenario configuration (all keys explicit)",
        f"seed = {config.seed}",
        f"epochs = {config.epochs}",
        f"epoch_interval_s = {config.epoch_interval_s}",
        f"registry_size = {config.registry_size}",
        f"committee_size = {config.committee_size}",
        f"quorum = {config.quorum}",
        f"value_min = {config.value_min}",
        f"value_max = {config.value_max}",
        f"value_base = {config.value_base}",
        f"value_walk_max = {config.value_walk_max}",
        f"noise_max = {config.noise_max}",
        f"delta_net_min_s = {config.delta_net_min_s}",
        f"delta_net_max_s = {config.delta_net_max_s}",
        f"t_prove_s = {config.t_prove_s}",
        f"chains = {','.join(config.chains)}",
        f"adversary_behavior = {config.adversary_behavior}",
        f"adversary_count = {config.adversary_count}",
        f"fraud_period = {config.fraud_period}",
        f"initial_stake_eth = {wei_to_eth_text(config.initial_stake_wei)}",
        f"min_stake_eth = {wei_to_eth_text(config.min_stake_wei)}",
        f"slash_cut_eth = {wei_to_eth_text(config.slash_cut_wei)}",
        f"governance_delay_epochs = {config.governance_delay_epochs}",
        f"governance = {governance}",
    ]
    return "\n".join(lines) + "\n"


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())
