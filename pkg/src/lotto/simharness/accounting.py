"""Per-party, per-stage message byte totals.

The server's traffic is O(n + s^2) per round (announcements and claims are
linear in n; every participant receives the set and the bundle, each O(s)).
A selected client's traffic is O(s); a non-selected client's is O(1).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..protocol import ProtocolConfig, RoundTranscript
from ..protocol.messages import ANNOUNCEMENT_LEN, CLAIM_LEN, SIGNATURE_MSG_LEN
from ..protocol.round import SERVER


@dataclass
class ByteTotals:
    rounds: int = 0
    server: Counter = field(default_factory=Counter)
    clients: Counter = field(default_factory=Counter)
    selected_bytes: int = 0
    selected_count: int = 0
    modeled: bool = False

    def __add__(self, other: "ByteTotals") -> "ByteTotals":
        return ByteTotals(
            self.rounds + other.rounds,
            self.server + other.server,
            self.clients + other.clients,
            self.selected_bytes + other.selected_bytes,
            self.selected_count + other.selected_count,
            self.modeled or other.modeled,
        )

    def server_total(self, stages=(1, 2, 3)) -> int:
        return sum(self.server[st] for st in stages)

    def server_per_round(self, stages=(1, 2, 3)) -> float:
        return self.server_total(stages) / self.rounds if self.rounds else 0.0

    def selected_client_mean(self) -> float:
        return self.selected_bytes / self.selected_count if self.selected_count else 0.0

    def rows(self) -> list[dict]:
        out = []
        for role, table in (("server", self.server), ("clients", self.clients)):
            for stage in sorted(table):
                out.append(
                    {
                        "role": role,
                        "stage": stage,
                        "total_bytes": table[stage],
                        "per_round": table[stage] / self.rounds if self.rounds else 0.0,
                    }
                )
        out.append(
            {
                "role": "selected-client-mean",
                "stage": "all",
                "total_bytes": self.selected_bytes,
                "per_round": self.selected_client_mean(),
            }
        )
        return out


def transcript_bytes(tr: RoundTranscript) -> ByteTotals:
    out = ByteTotals(rounds=1)
    per_client: Counter = Counter()
    selected = set()
    for m in tr.messages:
        out.server[m.stage] += m.nbytes
        out.clients[m.stage] += m.nbytes
        client = m.receiver if m.sender == SERVER else m.sender
        per_client[client] += m.nbytes
        if m.kind == "participants":
            selected.add(m.receiver)
    out.selected_bytes = sum(per_client[c] for c in selected)
    out.selected_count = len(selected)
    return out


def record_len(config: ProtocolConfig) -> int:
    return 8 + 32 + 32 + (80 if config.client_centric else 0)


def set_message_len(config: ProtocolConfig) -> int:
    return 16 + config.s * record_len(config) + 8


def bundle_len(k: int) -> int:
    return 8 + SIGNATURE_MSG_LEN * k


def message_accounting(source) -> ByteTotals:
    """Totals for a transcript, a round outcome or a Monte Carlo report."""
    if isinstance(source, ByteTotals):
        return source
    if isinstance(source, RoundTranscript):
        return transcript_bytes(source)
    b = getattr(source, "bytes", None)
    if isinstance(b, ByteTotals):
        return b
    raise TypeError(f"no message log on {type(source).__name__}")


def modeled_bytes(config: ProtocolConfig, n: int, candidates, completed) -> ByteTotals:
    """Honest-path byte totals from candidate counts, for the fast engine.

    Uses the same message sizes as the full protocol; stages 2-3 only count
    rounds that reached finalization.
    """
    rounds = len(candidates)
    done = int(completed.sum())
    s = config.s
    out = ByteTotals(rounds=rounds, modeled=True)
    if config.client_centric:
        out.server[1] = rounds * n * ANNOUNCEMENT_LEN + int(candidates.sum()) * CLAIM_LEN
    else:
        out.server[1] = 0
    out.server[2] = done * s * set_message_len(config)
    out.server[3] = done * s * (SIGNATURE_MSG_LEN + bundle_len(s))
    out.clients = Counter(out.server)
    per_selected = set_message_len(config) + SIGNATURE_MSG_LEN + bundle_len(s)
    if config.client_centric:
        per_selected += ANNOUNCEMENT_LEN + CLAIM_LEN
    out.selected_bytes = done * s * per_selected
    out.selected_count = done * s
    return out
