"""
Delivery transcripts and their bit-exact text rendering
"""

from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

from core.bits import Role
from .messages import MessageKind, WireMessage


@dataclass(frozen=True)
class Delivery:
    """One delivered message"""
    step: int
    message: WireMessage
    receiver: Role
    annotation: str = ""

    @property
    def true_sender(self) -> Role:
        return self.message.true_sender

    @property
    def claimed_sender(self) -> Role:
        return self.message.claimed_sender

    @property
    def kind(self) -> MessageKind:
        return self.message.kind

    @property
    def sender_display(self) -> str:
        if self.message.impersonated:
            return f"{Role.EVE.letter}({self.claimed_sender.letter})"
        return self.true_sender.letter

    @property
    def receiver_display(self) -> str:
        if self.receiver is Role.EVE and self.message.intended_receiver is not Role.EVE:
            return f"{Role.EVE.letter}({self.message.intended_receiver.letter})"
        return self.receiver.letter

    def render(self) -> str:
        line = f"{self.step}. {self.sender_display} -> {self.receiver_display} : {self.message.payload.render()}"
        if self.annotation:
            line += f" [{self.annotation}]"
        return line


@dataclass
class Transcript:
    """Ordered deliveries of one scenario run"""
    deliveries: List[Delivery] = field(default_factory=list)

    def record(self, message: WireMessage, receiver: Role, annotation: str = "") -> Delivery:
        delivery = Delivery(len(self.deliveries) + 1, message, receiver, annotation)
        self.deliveries.append(delivery)
        return delivery

    def __len__(self) -> int:
        return len(self.deliveries)

    def __iter__(self) -> Iterator[Delivery]:
        return iter(self.deliveries)

    def __getitem__(self, index: int) -> Delivery:
        return self.deliveries[index]

    def delivered_to(self, role: Role) -> List[Delivery]:
        return [delivery for delivery in self.deliveries if delivery.receiver is role]

    def observation(self, role: Role) -> Tuple[Tuple[str, str, str], ...]:
        """What a principal saw: (claimed sender, kind, payload) per received message"""
        return tuple(
            (delivery.claimed_sender.letter, delivery.kind.value, delivery.message.payload.render())
            for delivery in self.delivered_to(role)
        )

    @property
    def annotations(self) -> List[str]:
        return [delivery.annotation for delivery in self.deliveries if delivery.annotation]

    def render(self) -> str:
        return "\n".join(delivery.render() for delivery in self.deliveries)
