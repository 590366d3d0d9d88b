"""Teleportation protocol drivers with ownership tracking and event traces.

Every run produces a ProtocolTrace: the ordered list of gate, transfer,
measurement, classical-message, and correction events, plus the final
state and the fidelity of the destination qubit against the unknown
input. Locality is enforced while running (an actor may only touch
qubits it owns) and can be re-checked after the fact with
``audit_locality``, which replays ownership from the recorded events.

Qubit roles, by convention of the drivers below:
  0 = source (carries the unknown amplitudes), always Alice's;
  1 = ancilla;
  2 = destination for the three-qubit protocols, relay for the
      four-qubit ones;
  3 = destination for the four-qubit protocols.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .qsim import (
    GATES,
    StateVector,
    apply_cnot,
    apply_single,
    bell_pair,
    ghz,
    measure,
    product_state,
    reduced_density,
)


class Party(Enum):
    ALICE = "alice"
    BOB = "bob"
    BROKER = "broker"


class EventKind(Enum):
    GATE = "gate"
    TRANSFER = "transfer"
    MEASURE = "measure"
    CLASSICAL_MSG = "msg"
    CORRECTION = "correction"


class LocalityError(RuntimeError):
    """An actor touched a qubit it does not own, or misused a channel."""


@dataclass(frozen=True)
class TraceEvent:
    kind: EventKind
    actor: Party
    gate: str = ""
    qubits: tuple[int, ...] = ()
    bit: int | None = None
    probability: float | None = None
    bits: tuple[int, ...] = ()
    src: Party | None = None
    dst: Party | None = None


@dataclass
class ProtocolTrace:
    protocol: str
    seed: int
    unknown: tuple[complex, complex]
    initial_owners: dict[int, Party]
    events: list[TraceEvent]
    final_state: StateVector
    final_fidelity: float
    dest_party: Party
    dest_qubit: int
    message_rounds: int

    @property
    def classical_bits_sent(self) -> int:
        return sum(
            len(e.bits) for e in self.events if e.kind is EventKind.CLASSICAL_MSG
        )


# Where each protocol is supposed to deliver the unknown state.
DESTINATION: dict[str, tuple[Party, int]] = {
    "standard": (Party.BOB, 2),
    "protocol1": (Party.BOB, 2),
    "protocol1_reversed": (Party.ALICE, 0),
    "protocol2": (Party.BOB, 3),
    "protocol2_variant": (Party.BOB, 3),
}

# Corrections after the four-qubit protocol's first two measurements,
# keyed by (source outcome, ancilla outcome). At that point the relay
# and destination hold a|00>+b|11> up to the signs and flips undone
# here. Alice still owns both qubits, so no party is recorded.
PROTOCOL2_STEP4: dict[tuple[int, int], tuple[tuple[int, str], ...]] = {
    (0, 0): (),
    (1, 0): ((2, "Z"),),
    (0, 1): ((3, "X"),),
    (1, 1): ((3, "ZX"),),
}

# Same branch fixes when the destination already sits with Bob: the
# sign fix stays local to Alice, and only the bit flip needs a message.
VARIANT_STEP4: dict[tuple[int, int], tuple[tuple[Party, int, str], ...]] = {
    (0, 0): (),
    (1, 0): ((Party.ALICE, 2, "Z"),),
    (0, 1): ((Party.BOB, 3, "X"),),
    (1, 1): ((Party.ALICE, 2, "Z"), (Party.BOB, 3, "X")),
}


class _Run:
    """Mutable run context: state, ownership, RNG, and the event log."""

    def __init__(self, protocol: str, unknown, seed: int,
                 state: StateVector, owners: dict[int, Party]):
        self.protocol = protocol
        self.unknown = (complex(unknown[0]), complex(unknown[1]))
        self.seed = seed
        self.rng = random.Random(seed)
        self.state = state
        self.owners = dict(owners)
        self.initial_owners = dict(owners)
        self.events: list[TraceEvent] = []
        self.message_rounds = 0

    def _require_owned(self, actor: Party, qubits) -> None:
        for q in qubits:
            if self.owners.get(q) is not actor:
                raise LocalityError(
                    f"{actor.value} acted on qubit {q} owned by "
                    f"{self.owners.get(q) and self.owners[q].value}"
                )

    def gate(self, actor: Party, name: str, *qubits: int) -> None:
        self._require_owned(actor, qubits)
        if name == "CNOT":
            control, target = qubits
            self.state = apply_cnot(self.state, control, target)
        else:
            (q,) = qubits
            self.state = apply_single(self.state, GATES[name], q)
        self.events.append(
            TraceEvent(EventKind.GATE, actor, gate=name, qubits=qubits)
        )

    def transfer(self, src: Party, dst: Party, qubit: int) -> None:
        if self.owners.get(qubit) is not src:
            raise LocalityError(f"{src.value} does not own qubit {qubit}")
        if src is dst:
            raise LocalityError("transfer must change ownership")
        self.owners[qubit] = dst
        self.events.append(
            TraceEvent(EventKind.TRANSFER, src, qubits=(qubit,), src=src, dst=dst)
        )

    def measure_(self, actor: Party, qubit: int) -> int:
        self._require_owned(actor, (qubit,))
        outcome, self.state = measure(self.state, qubit, self.rng.random())
        self.events.append(
            TraceEvent(
                EventKind.MEASURE, actor, qubits=(qubit,),
                bit=outcome.bit, probability=outcome.probability,
            )
        )
        return outcome.bit

    def send(self, src: Party, dst: Party, bits: tuple[int, ...]) -> None:
        if src is dst:
            raise LocalityError("classical message must go to another party")
        if not bits:
            raise LocalityError("classical message must carry at least one bit")
        self.message_rounds += 1
        self.events.append(
            TraceEvent(EventKind.CLASSICAL_MSG, src, bits=tuple(bits), src=src, dst=dst)
        )

    def silent_round(self) -> None:
        # A communication slot where nothing was sent this branch. It
        # still costs a round: the receiver has to wait for it.
        self.message_rounds += 1

    def correct(self, actor: Party, qubit: int, name: str) -> None:
        self._require_owned(actor, (qubit,))
        self.state = apply_single(self.state, GATES[name], qubit)
        self.events.append(
            TraceEvent(EventKind.CORRECTION, actor, gate=name, qubits=(qubit,))
        )

    def finish(self) -> ProtocolTrace:
        party, qubit = DESTINATION[self.protocol]
        a, b = self.unknown
        target = np.array([a, b])
        rho = reduced_density(self.state, {qubit}).matrix
        fid = float(np.real(np.conj(target) @ rho @ target))
        return ProtocolTrace(
            protocol=self.protocol,
            seed=self.seed,
            unknown=self.unknown,
            initial_owners=self.initial_owners,
            events=self.events,
            final_state=self.state,
            final_fidelity=min(1.0, max(0.0, fid)),
            dest_party=party,
            dest_qubit=qubit,
            message_rounds=self.message_rounds,
        )


def run_standard(unknown, seed: int = 0) -> ProtocolTrace:
    """Two-bit baseline: entangled pair, both outcomes sent, X then Z."""
    state = product_state(unknown, bell_pair())
    run = _Run("standard", unknown, seed, state,
               {0: Party.ALICE, 1: Party.BROKER, 2: Party.BROKER})
    run.transfer(Party.BROKER, Party.ALICE, 1)
    run.transfer(Party.BROKER, Party.BOB, 2)
    run.gate(Party.ALICE, "CNOT", 0, 1)
    run.gate(Party.ALICE, "H", 0)
    m0 = run.measure_(Party.ALICE, 0)
    m1 = run.measure_(Party.ALICE, 1)
    run.send(Party.ALICE, Party.BOB, (m0, m1))
    run.correct(Party.BOB, 2, "X" if m1 else "I")
    run.correct(Party.BOB, 2, "Z" if m0 else "I")
    return run.finish()


def run_protocol1(unknown, seed: int = 0, *, exchange_steps: bool = False) -> ProtocolTrace:
    """One-bit chained-XOR protocol on three qubits.

    Alice chains XORs from the source through the ancilla to the
    destination qubit, hands the destination to Bob, and measures. Only
    the source outcome matters; the ancilla outcome never changes which
    correction Bob needs, so a single bit suffices.

    With ``exchange_steps`` the source-qubit mixing gate runs before the
    second XOR instead of after it. The two orders commute (disjoint
    qubits), so every downstream number is unchanged.
    """
    state = product_state(unknown, bell_pair())
    run = _Run("protocol1", unknown, seed, state,
               {0: Party.ALICE, 1: Party.BROKER, 2: Party.BROKER})
    run.transfer(Party.BROKER, Party.ALICE, 1)
    run.transfer(Party.BROKER, Party.ALICE, 2)
    run.gate(Party.ALICE, "CNOT", 0, 1)
    if exchange_steps:
        run.gate(Party.ALICE, "H", 0)
        run.gate(Party.ALICE, "CNOT", 1, 2)
        run.transfer(Party.ALICE, Party.BOB, 2)
    else:
        run.gate(Party.ALICE, "CNOT", 1, 2)
        run.transfer(Party.ALICE, Party.BOB, 2)
        run.gate(Party.ALICE, "H", 0)
    m0 = run.measure_(Party.ALICE, 0)
    run.measure_(Party.ALICE, 1)
    run.send(Party.ALICE, Party.BOB, (m0,))
    run.correct(Party.BOB, 2, "Z" if m0 else "I")
    return run.finish()


def run_protocol1_reversed(unknown, seed: int = 0) -> ProtocolTrace:
    """Chained-XOR protocol run from the receiving side.

    After the XOR chain the source and destination qubits form
    a|00>+b|11> with the ancilla disentangled, a symmetric resource: Bob
    mixes and measures his qubit instead, sends his one outcome bit, and
    Alice's untouched source qubit ends up holding the unknown state.
    """
    state = product_state(unknown, bell_pair())
    run = _Run("protocol1_reversed", unknown, seed, state,
               {0: Party.ALICE, 1: Party.BROKER, 2: Party.BROKER})
    run.transfer(Party.BROKER, Party.ALICE, 1)
    run.transfer(Party.BROKER, Party.ALICE, 2)
    run.gate(Party.ALICE, "CNOT", 0, 1)
    run.gate(Party.ALICE, "CNOT", 1, 2)
    run.transfer(Party.ALICE, Party.BOB, 2)
    run.gate(Party.BOB, "H", 2)
    m2 = run.measure_(Party.BOB, 2)
    run.send(Party.BOB, Party.ALICE, (m2,))
    run.correct(Party.ALICE, 0, "Z" if m2 else "I")
    return run.finish()


def run_protocol2(unknown, seed: int = 0) -> ProtocolTrace:
    """One-bit protocol on a three-particle entangled resource.

    Alice chains XORs into the shared triple, measures the source and
    ancilla, and fixes the two surviving qubits locally (she still holds
    both). Only then does the destination qubit travel to Bob; one more
    local mix-and-measure on the relay costs the single classical bit.
    """
    state = product_state(unknown, ghz(3))
    run = _Run("protocol2", unknown, seed, state,
               {0: Party.ALICE, 1: Party.BROKER, 2: Party.BROKER, 3: Party.BROKER})
    for q in (1, 2, 3):
        run.transfer(Party.BROKER, Party.ALICE, q)
    run.gate(Party.ALICE, "CNOT", 0, 1)
    run.gate(Party.ALICE, "CNOT", 1, 2)
    run.gate(Party.ALICE, "H", 0)
    m0 = run.measure_(Party.ALICE, 0)
    m1 = run.measure_(Party.ALICE, 1)
    for qubit, name in PROTOCOL2_STEP4[(m0, m1)]:
        run.correct(Party.ALICE, qubit, name)
    run.transfer(Party.ALICE, Party.BOB, 3)
    run.gate(Party.ALICE, "H", 2)
    m2 = run.measure_(Party.ALICE, 2)
    run.send(Party.ALICE, Party.BOB, (m2,))
    run.correct(Party.BOB, 3, "Z" if m2 else "I")
    return run.finish()


def run_protocol2_variant(unknown, seed: int = 0) -> ProtocolTrace:
    """Four-qubit protocol with the destination at Bob from the start.

    The ancilla-outcome fix now needs a bit flip on Bob's side, so a
    one-bit instruction goes out in the branches where the ancilla read
    1 (half of them) and the slot stays silent otherwise. With the final
    relay bit always sent, the expected cost is 1.5 bits over two rounds.
    """
    state = product_state(unknown, ghz(3))
    run = _Run("protocol2_variant", unknown, seed, state,
               {0: Party.ALICE, 1: Party.BROKER, 2: Party.BROKER, 3: Party.BROKER})
    run.transfer(Party.BROKER, Party.ALICE, 1)
    run.transfer(Party.BROKER, Party.ALICE, 2)
    run.transfer(Party.BROKER, Party.BOB, 3)
    run.gate(Party.ALICE, "CNOT", 0, 1)
    run.gate(Party.ALICE, "CNOT", 1, 2)
    run.gate(Party.ALICE, "H", 0)
    m0 = run.measure_(Party.ALICE, 0)
    m1 = run.measure_(Party.ALICE, 1)
    if m1:
        run.send(Party.ALICE, Party.BOB, (1,))
    else:
        run.silent_round()
    for party, qubit, name in VARIANT_STEP4[(m0, m1)]:
        run.correct(party, qubit, name)
    run.gate(Party.ALICE, "H", 2)
    m2 = run.measure_(Party.ALICE, 2)
    run.send(Party.ALICE, Party.BOB, (m2,))
    run.correct(Party.BOB, 3, "Z" if m2 else "I")
    return run.finish()


PROTOCOLS = {
    "standard": run_standard,
    "protocol1": run_protocol1,
    "protocol1_reversed": run_protocol1_reversed,
    "protocol2": run_protocol2,
    "protocol2_variant": run_protocol2_variant,
}


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    checked_events: int
    violation: str | None = None
    event_index: int | None = None


def audit_locality(trace: ProtocolTrace) -> AuditReport:
    """Replay ownership over the recorded events and flag any violation.

    Rules: gates, corrections, and measurements require the actor to own
    every touched qubit; a transfer must be performed by the current
    owner and change hands; messages need a nonempty payload and two
    distinct parties; the broker only ever hands out qubits.
    """
    owners = dict(trace.initial_owners)

    def fail(i, why):
        return AuditReport(False, checked_events=i, violation=why, event_index=i)

    for i, e in enumerate(trace.events):
        if e.actor is Party.BROKER and e.kind is not EventKind.TRANSFER:
            return fail(i, f"broker performed {e.kind.value}")
        if e.kind in (EventKind.GATE, EventKind.CORRECTION, EventKind.MEASURE):
            for q in e.qubits:
                if owners.get(q) is not e.actor:
                    return fail(
                        i,
                        f"{e.actor.value} touched qubit {q} owned by "
                        f"{owners.get(q) and owners[q].value}",
                    )
        elif e.kind is EventKind.TRANSFER:
            (q,) = e.qubits
            if e.src is not e.actor or owners.get(q) is not e.actor:
                return fail(i, f"transfer of qubit {q} not made by its owner")
            if e.dst is e.src or e.dst is None:
                return fail(i, f"transfer of qubit {q} does not change hands")
            owners[q] = e.dst
        elif e.kind is EventKind.CLASSICAL_MSG:
            if e.src is not e.actor or e.dst is e.src or e.dst is None:
                return fail(i, "message endpoints invalid")
            if len(e.bits) < 1:
                return fail(i, "message carries no bits")
    return AuditReport(True, checked_events=len(trace.events))


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}i"


def format_trace(trace: ProtocolTrace) -> str:
    """Render a trace as tab-separated lines, one event per line.

    Columns are: event index, kind, actor, then kind-specific fields.
    A footer line reports the classical cost, the destination fidelity,
    and the seed. The output is deterministic for a given trace.
    """
    lines = [
        f"protocol={trace.protocol}"
        f"\ta={_fmt_complex(trace.unknown[0])}"
        f"\tb={_fmt_complex(trace.unknown[1])}"
    ]
    for i, e in enumerate(trace.events):
        head = f"{i}\t{e.kind.value}\t{e.actor.value}"
        if e.kind is EventKind.GATE or e.kind is EventKind.CORRECTION:
            qs = ",".join(str(q) for q in e.qubits)
            lines.append(f"{head}\t{e.gate}\t{qs}")
        elif e.kind is EventKind.TRANSFER:
            lines.append(
                f"{head}\t{e.qubits[0]}\t{e.src.value}->{e.dst.value}"
            )
        elif e.kind is EventKind.MEASURE:
            lines.append(
                f"{head}\t{e.qubits[0]}\tbit={e.bit}\tp={e.probability:.12g}"
            )
        elif e.kind is EventKind.CLASSICAL_MSG:
            payload = ",".join(str(b) for b in e.bits)
            lines.append(f"{head}\t{e.src.value}->{e.dst.value}\tbits={payload}")
    lines.append(
        f"bits={trace.classical_bits_sent}"
        f"\trounds={trace.message_rounds}"
        f"\tfidelity={trace.final_fidelity:.12g}"
        f"\tseed={trace.seed}"
    )
    return "\n".join(lines)
