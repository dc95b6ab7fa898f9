"""Destination chains as block-producing verifier state machines.

Each chain runs the packet verifier at a fixed, size-independent gas
cost taken from a per-chain lookup table, records accepted medians,
and emits fraud events on rejection.  Gas is a table model, not metered
execution: each operation kind costs a constant regardless of packet
contents or committee size.

Time is integer simulated milliseconds throughout.  Block h is produced
at h * block_time; a transaction arriving at time T lands in the first
block at or after T and its verdict becomes final ``finality_blocks``
block times after arrival.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import UnknownOperation
from .oracle import AggregationParams
from .packets import OraclePacket
from .proofs import VerifyResult, verify
from .vrf import Committee

OP_VERIFY = "verify_proof"
OP_FRAUD = "submit_fraud"
OP_GOVERNANCE = "governance_update"
REQUIRED_OPS = (OP_VERIFY, OP_FRAUD, OP_GOVERNANCE)

GAS_CEILING = 300_000  # hard per-call budget for on-chain proof verification


@dataclass(frozen=True)
class ChainConfig:
    """Static parameters of one destination chain."""

    chain_id: str
    kind: str  # "l1" or "l2"
    block_time_seconds: float
    finality_blocks: int
    gas_table: dict[str, int]

    def __post_init__(self) -> None:
        if not self.chain_id:
            raise ValueError("chain id must be non-empty")
        if self.kind not in ("l1", "l2"):
            raise ValueError("chain kind must be 'l1' or 'l2'")
        if self.block_time_seconds <= 0:
            raise ValueError("block time must be positive")
        if self.finality_blocks < 1:
            raise ValueError("finality must be at least one block")
        missing = [op for op in REQUIRED_OPS if op not in self.gas_table]
        if missing:
            raise ValueError(f"gas table missing operations: {missing}")
        for op, cost in self.gas_table.items():
            if cost < 0:
                raise ValueError(f"negative gas cost for {op}")
        if self.gas_table[OP_VERIFY] > GAS_CEILING:
            raise ValueError(
                f"verify gas {self.gas_table[OP_VERIFY]} exceeds ceiling {GAS_CEILING}"
            )

    @property
    def block_time_ms(self) -> int:
        return round(self.block_time_seconds * 1000)

    @property
    def finality_ms(self) -> int:
        return self.finality_blocks * self.block_time_ms


def gas_cost(config: ChainConfig, op_kind: str) -> int:
    """Constant gas for one operation kind on one chain."""
    if op_kind not in config.gas_table:
        raise UnknownOperation(f"chain {config.chain_id} has no operation {op_kind!r}")
    return config.gas_table[op_kind]


def sepolia() -> ChainConfig:
    """L1 testnet profile: 15 s blocks, single-block finality."""
    return ChainConfig(
        chain_id="sepolia",
        kind="l1",
        block_time_seconds=15.0,
        finality_blocks=1,
        gas_table={OP_VERIFY: 296_112, OP_FRAUD: 52_341, OP_GOVERNANCE: 38_220},
    )


def scroll() -> ChainConfig:
    """L2 rollup profile: 2 s blocks, single-block finality."""
    return ChainConfig(
        chain_id="scroll",
        kind="l2",
        block_time_seconds=2.0,
        finality_blocks=1,
        gas_table={OP_VERIFY: 88_029, OP_FRAUD: 17_904, OP_GOVERNANCE: 11_706},
    )


CHAIN_PRESETS = {"sepolia": sepolia, "scroll": scroll}


@dataclass(frozen=True)
class Receipt:
    """Finalized outcome of one packet submission."""

    chain_id: str
    epoch: int
    block_height: int
    gas_used: int
    result: VerifyResult
    timestamp_ms: int  # simulated time at which the verdict is final


@dataclass(frozen=True)
class FraudEvent:
    """Emitted when a destination chain rejects a packet."""

    chain_id: str
    epoch: int
    packet_digest: bytes
    failure_reason: str
    emitted_at_ms: int


@dataclass
class Chain:
    """Mutable runtime state of one destination chain.

    Single-owner: mutated only by the simulation event loop.
    """

    config: ChainConfig
    height: int = 0
    recorded: dict[int, int] = field(default_factory=dict)  # epoch -> accepted median
    receipts: list[Receipt] = field(default_factory=list)
    fraud_events: list[FraudEvent] = field(default_factory=list)
    gas_by_op: dict[str, int] = field(default_factory=dict)

    @property
    def chain_id(self) -> str:
        return self.config.chain_id

    @property
    def total_gas(self) -> int:
        return sum(self.gas_by_op.values())

    def produce_block(self, now_ms: int) -> int:
        """Produce the next block; ``now_ms`` must be at or past its slot."""
        due = (self.height + 1) * self.config.block_time_ms
        if now_ms < due:
            raise ValueError(f"block {self.height + 1} not due until {due} ms")
        self.height += 1
        return self.height

    def advance_to(self, now_ms: int) -> int:
        """Produce every block due by ``now_ms``; returns the new height."""
        while (self.height + 1) * self.config.block_time_ms <= now_ms:
            self.height += 1
        return self.height

    def final_height(self) -> int:
        """Highest block with ``finality_blocks`` newer blocks on top."""
        return max(0, self.height - self.config.finality_blocks)

    def is_final(self, block_height: int) -> bool:
        return block_height + self.config.finality_blocks <= self.height

    def charge(self, op_kind: str) -> int:
        cost = gas_cost(self.config, op_kind)
        self.gas_by_op[op_kind] = self.gas_by_op.get(op_kind, 0) + cost
        return cost

    def _inclusion_height(self, now_ms: int) -> int:
        bt = self.config.block_time_ms
        return max(1, -(-now_ms // bt))

    def submit_packet(
        self,
        packet: OraclePacket,
        committee: Committee,
        params: AggregationParams,
        now_ms: int,
    ) -> Receipt:
        """Verify a packet on-chain and finalize the verdict.

        Charges the constant verify gas whether or not the packet is
        accepted.  Re-submitting for an epoch whose median is already
        recorded returns the original receipt unchanged (idempotent
        replay protection).  A rejection appends a FraudEvent.
        """
        self.advance_to(now_ms)
        if packet.epoch in self.recorded:
            for receipt in self.receipts:
                if receipt.epoch == packet.epoch and receipt.result.accepted:
                    return receipt
        gas = self.charge(OP_VERIFY)
        result = verify(packet, committee, params)
        final_ms = now_ms + self.config.finality_ms
        receipt = Receipt(
            chain_id=self.chain_id,
            epoch=packet.epoch,
            block_height=self._inclusion_height(now_ms),
            gas_used=gas,
            result=result,
            timestamp_ms=final_ms,
        )
        self.receipts.append(receipt)
        if result.accepted:
            self.recorded[packet.epoch] = packet.median
        else:
            self.fraud_events.append(
                FraudEvent(
                    chain_id=self.chain_id,
                    epoch=packet.epoch,
                    packet_digest=packet.digest(),
                    failure_reason=result.reason(),
                    emitted_at_ms=final_ms,
                )
            )
        return receipt

    def recorded_median(self, epoch: int) -> Optional[int]:
        return self.recorded.get(epoch)
