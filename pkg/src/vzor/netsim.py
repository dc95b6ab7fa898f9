"""Deterministic discrete-event simulation of the full epoch lifecycle.

One epoch runs: pulse emission, committee draw, observation collection
under bounded message delay, packet build after the modeled proving
time, delivery to every destination chain, verification receipts, and,
on rejection, watcher relay plus hub slashing.

All simulated time is integer milliseconds and every random draw comes
from named sub-streams of the single scenario seed, so a (scenario,
seed) pair reproduces byte-identical traces.

Latency accounting: observations close at pulse-time + delta_net_max
(the partial-synchrony deadline), the packet is ready t_prove later,
each chain receives it after its own delay <= delta_net_max, and the
verdict is final tau_f after arrival.  End-to-end latency is therefore
bounded by tau_f_max + delta_net_max + t_prove plus a fixed slack of
one extra delta_net_max for the observation leg.
"""

from __future__ import annotations

import enum
import heapq
import random
import statistics
from dataclasses import dataclass, field
from typing import Optional

from .beacon import BeaconParams, Pulse, make_chain
from .chains import CHAIN_PRESETS, OP_FRAUD, OP_GOVERNANCE, Chain, ChainConfig
from .encoding import be_u64, tagged_digest
from .errors import QuorumNotMet
from .hub import Hub, SlashReport, accuse_all_signers
from .oracle import AggregationParams, SignedObservation, median, sign_observation
from .packets import OraclePacket, build_packet
from .scenario import ScenarioConfig, canonical_text
from .vrf import Committee, ReporterSecret, SortitionParams, evaluate_registry, select_committee, vrf_keygen

_RNG_TAG = "VZOR/rng/v1"
_KEYSEED_TAG = "VZOR/keyseed/v1"
_BEACON_SEED_TAG = "VZOR/beacon-seed/v1"


def _stream(seed: int, label: str) -> random.Random:
    """Independent deterministic RNG sub-stream for one component."""
    digest = tagged_digest(_RNG_TAG, be_u64(seed), label.encode("utf-8"))
    return random.Random(int.from_bytes(digest, "big"))


def reporter_key_seed(run_seed: int, reporter_id: int) -> bytes:
    return tagged_digest(_KEYSEED_TAG, be_u64(run_seed), be_u64(reporter_id))


class EventKind(enum.Enum):
    PULSE_EMIT = "pulse_emit"
    COMMITTEE_DRAW = "committee_draw"
    OBSERVATION_READY = "observation_ready"
    PACKET_BUILT = "packet_built"
    PACKET_DELIVERED = "packet_delivered"
    FRAUD_RELAYED = "fraud_relayed"
    SLASH_APPLIED = "slash_applied"
    GOVERNANCE_EFFECTIVE = "governance_effective"


@dataclass(frozen=True)
class SimEvent:
    fire_at_ms: int
    sequence: int
    kind: EventKind
    payload: tuple


@dataclass(frozen=True)
class TimingModel:
    epoch_interval_ms: int
    delta_net_min_ms: int
    delta_net_max_ms: int
    t_prove_ms: int

    @classmethod
    def from_scenario(cls, config: ScenarioConfig) -> "TimingModel":
        return cls(
            epoch_interval_ms=config.epoch_interval_ms,
            delta_net_min_ms=config.delta_net_min_ms,
            delta_net_max_ms=config.delta_net_max_ms,
            t_prove_ms=config.t_prove_ms,
        )

    def latency_bound_ms(self, chain_configs: list[ChainConfig]) -> int:
        """tau_f_max + delta_net_max + t_prove + slack, slack = delta_net_max."""
        tau_f = max(c.finality_ms for c in chain_configs)
        return tau_f + self.delta_net_max_ms + self.t_prove_ms + self.delta_net_max_ms


@dataclass(frozen=True)
class ReceiptInfo:
    chain_id: str
    accepted: bool
    reason: str
    gas: int
    block: int
    final_ms: int


@dataclass(frozen=True)
class SlashInfo:
    origin_chain: str
    emitted_ms: int
    applied_ms: int
    latency_ms: int
    slashed: tuple[int, ...]
    per_reporter_cut: int
    total_cut: int


@dataclass(frozen=True)
class GovernanceRecord:
    effective_epoch: int
    parameter: str
    value: int


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    t0_ms: int
    pulse_digest: bytes
    committee: tuple[tuple[int, bytes], ...]  # (reporter_id, public key), ascending id
    packet_bytes: Optional[bytes]
    median: Optional[int]
    receipts: tuple[ReceiptInfo, ...]
    e2e_ms: Optional[int]
    fraud_injected: bool
    slash: Optional[SlashInfo]
    ledger_total: int
    ledger_burned: int

    def committee_ids(self) -> tuple[int, ...]:
        return tuple(rid for rid, _ in self.committee)


@dataclass(frozen=True)
class RunTrace:
    config: ScenarioConfig
    config_text: str
    chain_ids: tuple[str, ...]
    records: tuple[EpochRecord, ...]
    governance_records: tuple[GovernanceRecord, ...]
    initial_total: int
    final_total: int
    final_burned: int
    gas_totals: tuple[tuple[str, str, int], ...]  # (chain_id, op, total), fixed order


@dataclass
class _EpochState:
    pulse: Pulse
    committee: Optional[Committee] = None
    governed_n: int = 0
    agg: Optional[AggregationParams] = None
    observations: list[SignedObservation] = field(default_factory=list)
    packet: Optional[OraclePacket] = None
    fraud_injected: bool = False
    receipts: dict[str, ReceiptInfo] = field(default_factory=dict)
    relay_scheduled: bool = False
    slash: Optional[SlashInfo] = None


class Simulator:
    """Single-threaded event loop owning every protocol state machine."""

    def __init__(self, config: ScenarioConfig) -> None:
        config.validate()
        self.config = config
        self.timing = TimingModel.from_scenario(config)
        self.chains: list[Chain] = [Chain(CHAIN_PRESETS[name]()) for name in config.chains]
        self.hub = Hub(
            genesis=config.genesis_governed(),
            governance_delay=config.governance_delay_epochs,
        )
        self.secrets: list[ReporterSecret] = []
        for rid in range(config.registry_size):
            _, secret = vrf_keygen(reporter_key_seed(config.seed, rid), rid)
            self.secrets.append(secret)
            self.hub.register(rid, config.initial_stake_wei, at_epoch=0)
        for item in config.governance:
            self.hub.propose_update(item.parameter, item.value, item.at_epoch)

        beacon_seed = tagged_digest(_BEACON_SEED_TAG, be_u64(config.seed))
        self.pulses = make_chain(BeaconParams(seed=beacon_seed), config.epochs)

        self._rng_walk = _stream(config.seed, "walk")
        self._rng_noise = _stream(config.seed, "noise")
        self._rng_obs_delay = _stream(config.seed, "delay/observation")
        self._rng_chain_delay = {
            name: _stream(config.seed, f"delay/chain/{name}") for name in config.chains
        }
        self._rng_watcher = _stream(config.seed, "delay/watcher")

        self.truth = self._truth_series()
        self.controlled = config.controlled_ids()
        # hub state advances on the fastest connected chain's block cadence
        self.hub_tick_ms = min(c.config.block_time_ms for c in self.chains)

        self._heap: list[tuple[int, int, SimEvent]] = []
        self._seq = 0
        self._now = 0
        self._states: dict[int, _EpochState] = {}
        self._governance_records: list[GovernanceRecord] = []

    # -- setup helpers ----------------------------------------------------------

    def _truth_series(self) -> list[int]:
        cfg = self.config
        series = [cfg.value_base]
        for _ in range(1, cfg.epochs):
            step = self._rng_walk.randint(-cfg.value_walk_max, cfg.value_walk_max)
            series.append(self._clamp(series[-1] + step))
        return series

    def _clamp(self, value: int) -> int:
        return max(self.config.value_min, min(self.config.value_max, value))

    def _delay(self, rng: random.Random) -> int:
        return rng.randint(self.timing.delta_net_min_ms, self.timing.delta_net_max_ms)

    def _push(self, fire_at_ms: int, kind: EventKind, payload: tuple) -> None:
        if fire_at_ms < self._now:
            raise AssertionError("event scheduled in the past")
        event = SimEvent(fire_at_ms=fire_at_ms, sequence=self._seq, kind=kind, payload=payload)
        self._seq += 1
        heapq.heappush(self._heap, (fire_at_ms, event.sequence, event))

    def _t0(self, epoch: int) -> int:
        return epoch * self.timing.epoch_interval_ms

    # -- event loop ---------------------------------------------------------------

    def run(self) -> RunTrace:
        cfg = self.config
        for epoch in range(cfg.epochs):
            self._push(self._t0(epoch), EventKind.PULSE_EMIT, (epoch,))
        for update in self.hub.updates:
            if update.effective_epoch < cfg.epochs:
                self._push(
                    self._t0(update.effective_epoch),
                    EventKind.GOVERNANCE_EFFECTIVE,
                    (update.effective_epoch, update.parameter, update.value),
                )

        while self._heap:
            fire, _, event = heapq.heappop(self._heap)
            if fire < self._now:
                raise AssertionError("event fired out of order")
            self._now = fire
            self._dispatch(event)

        return self._finalize()

    def _dispatch(self, event: SimEvent) -> None:
        kind = event.kind
        if kind is EventKind.PULSE_EMIT:
            self._on_pulse(*event.payload)
        elif kind is EventKind.COMMITTEE_DRAW:
            self._on_committee_draw(*event.payload)
        elif kind is EventKind.OBSERVATION_READY:
            self._on_observation(*event.payload)
        elif kind is EventKind.PACKET_BUILT:
            self._on_packet_built(*event.payload)
        elif kind is EventKind.PACKET_DELIVERED:
            self._on_packet_delivered(*event.payload)
        elif kind is EventKind.FRAUD_RELAYED:
            self._on_fraud_relayed(*event.payload)
        elif kind is EventKind.SLASH_APPLIED:
            self._on_slash_applied(*event.payload)
        elif kind is EventKind.GOVERNANCE_EFFECTIVE:
            self._on_governance_effective(*event.payload)
        else:  # pragma: no cover
            raise AssertionError(f"unhandled event kind {kind}")

    def _on_pulse(self, epoch: int) -> None:
        self._states[epoch] = _EpochState(pulse=self.pulses[epoch])
        self._push(self._now, EventKind.COMMITTEE_DRAW, (epoch,))

    def _on_committee_draw(self, epoch: int) -> None:
        state = self._states[epoch]
        governed = self.hub.effective_params(epoch)
        state.governed_n = governed.n
        state.agg = self.config.aggregation_params(governed)
        active = [s for s in self.secrets if self.hub.ledger.is_active(s.id)]
        scored = evaluate_registry(active, state.pulse, epoch)
        state.committee = select_committee(
            state.pulse, epoch, scored, SortitionParams(committee_size=governed.n)
        )
        t0 = self._t0(epoch)
        for ident, _ in state.committee.members:
            rid = ident.id
            if self.config.adversary_behavior == "withhold" and rid in self.controlled:
                continue
            if self.config.adversary_behavior == "wrong_value" and rid in self.controlled:
                value = self.config.value_max
            else:
                noise = self._rng_noise.randint(-self.config.noise_max, self.config.noise_max)
                value = self._clamp(self.truth[epoch] + noise)
            arrival = t0 + self._delay(self._rng_obs_delay)
            self._push(arrival, EventKind.OBSERVATION_READY, (epoch, rid, value))
        built_at = t0 + self.timing.delta_net_max_ms + self.timing.t_prove_ms
        self._push(built_at, EventKind.PACKET_BUILT, (epoch,))

    def _on_observation(self, epoch: int, reporter_id: int, value: int) -> None:
        state = self._states[epoch]
        assert state.agg is not None
        state.observations.append(
            sign_observation(self.secrets[reporter_id], value, epoch, state.agg)
        )

    def _on_packet_built(self, epoch: int) -> None:
        state = self._states[epoch]
        assert state.committee is not None and state.agg is not None
        claimed = None
        if (
            self.config.adversary_behavior == "wrong_median_packet"
            and epoch % self.config.fraud_period == self.config.fraud_period - 1
            and state.observations
        ):
            claimed = median([o.value for o in state.observations]) + 1
            state.fraud_injected = True
        try:
            state.packet = build_packet(
                state.observations, state.committee, state.agg, claimed_median=claimed
            )
        except QuorumNotMet:
            state.packet = None  # epoch produces no packet; chains see nothing
            return
        for chain in self.chains:
            delay = self._delay(self._rng_chain_delay[chain.chain_id])
            self._push(
                self._now + delay, EventKind.PACKET_DELIVERED, (epoch, chain.chain_id)
            )

    def _on_packet_delivered(self, epoch: int, chain_id: str) -> None:
        state = self._states[epoch]
        assert state.packet is not None and state.committee is not None and state.agg is not None
        chain = next(c for c in self.chains if c.chain_id == chain_id)
        receipt = chain.submit_packet(state.packet, state.committee, state.agg, self._now)
        state.receipts[chain_id] = ReceiptInfo(
            chain_id=chain_id,
            accepted=receipt.result.accepted,
            reason=receipt.result.reason(),
            gas=receipt.gas_used,
            block=receipt.block_height,
            final_ms=receipt.timestamp_ms,
        )
        if not receipt.result.accepted:
            emitted = receipt.timestamp_ms
            arrival = emitted + self._delay(self._rng_watcher)
            self._push(arrival, EventKind.FRAUD_RELAYED, (epoch, chain_id, emitted))

    def _on_fraud_relayed(self, epoch: int, origin_chain: str, emitted_ms: int) -> None:
        state = self._states[epoch]
        if state.relay_scheduled:
            return  # later relays for the same packet change nothing
        state.relay_scheduled = True
        ticks = -(-self._now // self.hub_tick_ms)
        applied = max(self._now, ticks * self.hub_tick_ms)
        self._push(applied, EventKind.SLASH_APPLIED, (epoch, origin_chain, emitted_ms))

    def _on_slash_applied(self, epoch: int, origin_chain: str, emitted_ms: int) -> None:
        state = self._states[epoch]
        assert state.packet is not None and state.committee is not None and state.agg is not None
        fraud = accuse_all_signers(state.packet, origin_chain)
        report = self.hub.adjudicate(fraud, state.committee, state.agg)
        origin = next(c for c in self.chains if c.chain_id == origin_chain)
        origin.charge(OP_FRAUD)
        state.slash = SlashInfo(
            origin_chain=origin_chain,
            emitted_ms=emitted_ms,
            applied_ms=self._now,
            latency_ms=self._now - emitted_ms,
            slashed=report.slashed,
            per_reporter_cut=report.per_reporter_cut,
            total_cut=report.total_cut,
        )

    def _on_governance_effective(self, effective_epoch: int, parameter: str, value: int) -> None:
        for chain in self.chains:
            chain.charge(OP_GOVERNANCE)
        self._governance_records.append(
            GovernanceRecord(effective_epoch=effective_epoch, parameter=parameter, value=value)
        )

    # -- trace assembly -------------------------------------------------------------

    def _finalize(self) -> RunTrace:
        cfg = self.config
        initial_total = cfg.registry_size * cfg.initial_stake_wei
        running_total, running_burned = initial_total, 0
        records = []
        for epoch in range(cfg.epochs):
            state = self._states[epoch]
            assert state.committee is not None
            committee = tuple(
                sorted((i.id, i.public_key) for i, _ in state.committee.members)
            )
            receipts = tuple(
                state.receipts[name] for name in cfg.chains if name in state.receipts
            )
            e2e = None
            if state.packet is not None and receipts and all(r.accepted for r in receipts):
                e2e = max(r.final_ms for r in receipts) - self._t0(epoch)
            if state.slash is not None:
                running_total -= state.slash.total_cut
                running_burned += state.slash.total_cut
            records.append(
                EpochRecord(
                    epoch=epoch,
                    t0_ms=self._t0(epoch),
                    pulse_digest=state.pulse.chain_digest,
                    committee=committee,
                    packet_bytes=None if state.packet is None else state.packet.to_bytes(),
                    median=None if state.packet is None else state.packet.median,
                    receipts=receipts,
                    e2e_ms=e2e,
                    fraud_injected=state.fraud_injected,
                    slash=state.slash,
                    ledger_total=running_total,
                    ledger_burned=running_burned,
                )
            )
        total, burned = self.hub.snapshot()
        gas_totals = tuple(
            (chain.chain_id, op, chain.gas_by_op[op])
            for chain in self.chains
            for op in sorted(chain.gas_by_op)
        )
        return RunTrace(
            config=cfg,
            config_text=canonical_text(cfg),
            chain_ids=tuple(cfg.chains),
            records=tuple(records),
            governance_records=tuple(self._governance_records),
            initial_total=initial_total,
            final_total=total,
            final_burned=burned,
            gas_totals=gas_totals,
        )


def run(config: ScenarioConfig) -> RunTrace:
    """Execute one scenario end to end and return its complete trace."""
    return Simulator(config).run()


# -- post-run analysis ----------------------------------------------------------------


@dataclass(frozen=True)
class LivenessReport:
    bound_ms: int
    slack_ms: int
    checked_epochs: int
    violations: tuple[tuple[int, int], ...]  # (epoch, e2e_ms)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_liveness(trace: RunTrace, timing: Optional[TimingModel] = None) -> LivenessReport:
    """Assert the per-epoch latency bound on every honest epoch with a packet."""
    if timing is None:
        timing = TimingModel.from_scenario(trace.config)
    chain_configs = [CHAIN_PRESETS[name]() for name in trace.chain_ids]
    bound = timing.latency_bound_ms(chain_configs)
    checked = 0
    violations = []
    for record in trace.records:
        if record.fraud_injected or record.e2e_ms is None:
            continue
        checked += 1
        if record.e2e_ms > bound:
            violations.append((record.epoch, record.e2e_ms))
    return LivenessReport(
        bound_ms=bound,
        slack_ms=timing.delta_net_max_ms,
        checked_epochs=checked,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class MetricsSummary:
    epochs: int
    accepted_epochs: int
    throughput_pps: float
    mean_e2e_s: Optional[float]
    stdev_e2e_s: Optional[float]
    slash_count: int
    mean_slash_latency_s: Optional[float]
    gas_totals: tuple[tuple[str, str, int], ...]
    selection_counts: tuple[tuple[int, int], ...]  # (reporter_id, epochs selected)

    def to_text(self) -> str:
        lines = [
            f"epochs = {self.epochs}",
            f"accepted_epochs = {self.accepted_epochs}",
            f"throughput_pps = {self.throughput_pps}",
            f"mean_e2e_s = {'' if self.mean_e2e_s is None else self.mean_e2e_s}",
            f"stdev_e2e_s = {'' if self.stdev_e2e_s is None else self.stdev_e2e_s}",
            f"slash_count = {self.slash_count}",
            f"mean_slash_latency_s = "
            f"{'' if self.mean_slash_latency_s is None else self.mean_slash_latency_s}",
        ]
        for chain_id, op, total in self.gas_totals:
            lines.append(f"gas_{chain_id}_{op} = {total}")
        for rid, count in self.selection_counts:
            lines.append(f"selected_{rid} = {count}")
        return "\n".join(lines) + "\n"


def metrics(trace: RunTrace) -> MetricsSummary:
    e2e = [r.e2e_ms for r in trace.records if r.e2e_ms is not None]
    slash_latencies = [r.slash.latency_ms for r in trace.records if r.slash is not None]
    accepted = sum(
        1 for r in trace.records if r.receipts and all(x.accepted for x in r.receipts)
    )
    duration_s = trace.config.epochs * trace.config.epoch_interval_s
    counts: dict[int, int] = {}
    for record in trace.records:
        for rid in record.committee_ids():
            counts[rid] = counts.get(rid, 0) + 1
    return MetricsSummary(
        epochs=trace.config.epochs,
        accepted_epochs=accepted,
        throughput_pps=accepted / duration_s,
        mean_e2e_s=(statistics.fmean(e2e) / 1000.0) if e2e else None,
        stdev_e2e_s=(statistics.pstdev(e2e) / 1000.0) if len(e2e) > 1 else None,
        slash_count=len(slash_latencies),
        mean_slash_latency_s=(statistics.fmean(slash_latencies) / 1000.0)
        if slash_latencies
        else None,
        gas_totals=trace.gas_totals,
        selection_counts=tuple(sorted(counts.items())),
    )
