"""LTE hard-handover procedure as a per-run state machine.

The machine follows the standard step order: the A3 entering condition
(target exceeds serving by a hysteresis margin) must hold for a full
time-to-trigger, then a measurement report goes out gated on the uplink SNR,
preparation and command delays elapse with the command gated on the downlink
SNR, and SIB reading plus the RACH procedure complete the handover gated on
both links toward the target. A failed RACH ends in a fixed-delay
re-establishment to the strongest cell.

Protocol delays accumulate in continuous time from the report and are
quantised up to the measurement sample grid, so the default
50 + 15 + 55 ms pipeline completes exactly 3 samples (120 ms) after the
report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence


class Outcome(str, Enum):
    SUCCESS = "Success"
    FAIL_UPLINK_REPORT = "FailUplinkReport"
    FAIL_DOWNLINK_COMMAND = "FailDownlinkCommand"
    FAIL_RACH = "FailRach"
    NOT_TRIGGERED = "NotTriggered"


class Postponement(Enum):
    """How mobility between the report and command positions affects execution."""

    NO_HANDOVER = "NoHandover"
    HANDOVER_AT_B = "HandoverAtB"
    POSTPONED = "Postponed"


@dataclass(frozen=True)
class HandoverConfig:
    hysteresis_db: float = 2.0
    ttt_s: float = 0.040
    snr_gate_db: float = -10.0
    preparation_delay_s: float = 0.050
    command_delay_s: float = 0.015
    sib_rach_delay_s: float = 0.055
    reestablishment_delay_s: float = 0.200

    def __post_init__(self) -> None:
        if self.ttt_s <= 0.0:
            raise ValueError("ttt_s must be positive")
        for name in (
            "preparation_delay_s",
            "command_delay_s",
            "sib_rach_delay_s",
            "reestablishment_delay_s",
        ):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    def ttt_samples(self, sample_period_s: float) -> int:
        """TTT expressed in measurement samples; must sit on the sample grid."""
        ratio = self.ttt_s / sample_period_s
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError(
                f"ttt_s {self.ttt_s} is not a positive multiple of the "
                f"{sample_period_s} s sample period"
            )
        return round(ratio)


def a3_condition(l3_target_db: float, l3_serving_db: float, hysteresis_db: float) -> bool:
    """Entering condition: target exceeds serving by at least the hysteresis."""
    return l3_target_db - l3_serving_db >= hysteresis_db


def classify_postponement(
    margin_at_report_db: float,
    margin_at_command_db: float,
    hysteresis_db: float,
) -> Postponement:
    """Classify handover execution from the A3 margins at the two positions.

    ``margin_at_report_db`` is the target-minus-serving margin where the
    measurement report would be sent (position A), ``margin_at_command_db``
    where the command would be received (position B, further along, so the
    margin must be strictly larger). The entering condition is inclusive, so
    a margin equal to the hysteresis counts as triggered.
    """
    h_a, h_b, h0 = margin_at_report_db, margin_at_command_db, hysteresis_db
    if not h_a < h_b:
        raise ValueError(f"margin at the report position must be below the command one ({h_a} >= {h_b})")
    if h_a >= h0:
        return Postponement.HANDOVER_AT_B
    if h_b >= h0:
        return Postponement.POSTPONED
    return Postponement.NO_HANDOVER


@dataclass
class HandoverRecord:
    """Per-attempt outcome record; tick fields are None for phases never reached."""

    run_id: int
    serving_cell: int
    target_cell: int | None
    outcome: Outcome
    trigger_tick: int | None = None
    report_tick: int | None = None
    command_tick: int | None = None
    completion_tick: int | None = None
    reestablish_until_tick: int | None = None
    start_position_m: float | None = None
    total_delay_s: float | None = None


def interruption_window(record: HandoverRecord) -> tuple[int, int]:
    """Half-open tick interval [command, reconnect) with zero throughput.

    For a success the connection resumes at the completion tick; a failed
    RACH stays dark through re-establishment. Other outcomes never break the
    connection.
    """
    if record.outcome is Outcome.SUCCESS:
        return record.command_tick, record.completion_tick
    if record.outcome is Outcome.FAIL_RACH:
        return record.command_tick, record.reestablish_until_tick
    raise ValueError(f"no interruption window for outcome {record.outcome.value}")


class Phase(Enum):
    MONITORING = "Monitoring"
    TTT_RUNNING = "TttRunning"
    PREPARING = "Preparing"
    COMMAND_PENDING = "CommandPending"
    RACH_IN_PROGRESS = "RachInProgress"
    REESTABLISHING = "Reestablishing"


def _delay_ticks(delay_s: float, sample_period_s: float) -> int:
    """Ticks until a continuous-time delay has elapsed, rounded up to the grid."""
    return max(0, math.ceil(delay_s / sample_period_s - 1e-9))


class HandoverFsm:
    """Handover state machine of a single UE, stepped once per measurement tick.

    ``step`` consumes per-cell L3 measurements and per-cell instantaneous
    uplink/downlink effective SNRs (the SNR gates apply to the serving cell
    for the report and command, to the target cell for the RACH check) and
    returns the records of any attempt that terminated this tick. State
    transitions are logged in ``events`` as (name, tick) pairs.
    """

    def __init__(
        self,
        cfg: HandoverConfig,
        sample_period_s: float,
        n_cells: int,
        serving_cell: int,
        run_id: int = 0,
    ) -> None:
        if n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        if not 0 <= serving_cell < n_cells:
            raise ValueError("serving_cell out of range")
        self.cfg = cfg
        self.sample_period_s = sample_period_s
        self.n_cells = n_cells
        self.run_id = run_id
        self.serving_cell: int | None = serving_cell
        self.target_cell: int | None = None
        self.phase = Phase.MONITORING
        self.events: list[tuple[str, int]] = []
        self._n_ttt = cfg.ttt_samples(sample_period_s)
        self._ttt_count = 0
        self._trigger_tick: int | None = None
        self._report_tick: int | None = None
        self._prep_ready_tick: int | None = None
        self._command_due_tick: int | None = None
        self._completion_due_tick: int | None = None
        self._command_tick: int | None = None
        self._reestablish_until: int | None = None
        self._next_tick = 0

    def state_name(self, tick: int | None = None) -> str:
        """Externally visible state, resolving the preparation sub-phases."""
        if self.phase is Phase.PREPARING and tick is not None:
            if tick >= self._prep_ready_tick:
                return Phase.COMMAND_PENDING.value
        return self.phase.value

    def _best_non_serving(self, l3_db: Sequence[float]) -> int | None:
        best = None
        for cell in range(self.n_cells):
            if cell == self.serving_cell:
                continue
            if best is None or l3_db[cell] > l3_db[best]:
                best = cell
        return best

    def _strongest(self, l3_db: Sequence[float]) -> int:
        best = 0
        for cell in range(1, self.n_cells):
            if l3_db[cell] > l3_db[best]:
                best = cell
        return best

    def _reset_monitoring(self) -> None:
        self.phase = Phase.MONITORING
        self.target_cell = None
        self._ttt_count = 0
        self._trigger_tick = None
        self._report_tick = None
        self._prep_ready_tick = None
        self._command_due_tick = None
        self._completion_due_tick = None
        self._command_tick = None

    def _record(self, outcome: Outcome, **fields) -> HandoverRecord:
        return HandoverRecord(
            run_id=self.run_id,
            serving_cell=self.serving_cell,
            target_cell=self.target_cell,
            outcome=outcome,
            trigger_tick=self._trigger_tick,
            report_tick=self._report_tick,
            **fields,
        )

    def step(
        self,
        tick: int,
        l3_db: Sequence[float],
        ul_snr_db: Sequence[float],
        dl_snr_db: Sequence[float],
    ) -> list[HandoverRecord]:
        if tick != self._next_tick:
            raise ValueError(f"ticks must advance by exactly 1 (expected {self._next_tick}, got {tick})")
        self._next_tick = tick + 1
        cfg = self.cfg
        out: list[HandoverRecord] = []

        if self.phase is Phase.REESTABLISHING:
            if tick >= self._reestablish_until:
                self.serving_cell = self._strongest(l3_db)
                self.events.append(("reestablished", tick))
                self._reset_monitoring()
            else:
                return out

        if self.phase in (Phase.MONITORING, Phase.TTT_RUNNING):
            target = self._best_non_serving(l3_db)
            entered = target is not None and a3_condition(
                l3_db[target], l3_db[self.serving_cell], cfg.hysteresis_db
            )
            if entered:
                if self.phase is Phase.MONITORING:
                    self.phase = Phase.TTT_RUNNING
                    self._trigger_tick = tick
                    self._ttt_count = 1
                    self.events.append(("ttt_start", tick))
                else:
                    self._ttt_count += 1
                self.target_cell = target
            elif self.phase is Phase.TTT_RUNNING:
                self.events.append(("ttt_reset", tick))
                self._reset_monitoring()

            if self.phase is Phase.TTT_RUNNING and self._ttt_count >= self._n_ttt:
                if ul_snr_db[self.serving_cell] < cfg.snr_gate_db:
                    self._report_tick = tick
                    out.append(self._record(Outcome.FAIL_UPLINK_REPORT))
                    self.events.append(("report_blocked", tick))
                    self._reset_monitoring()
                else:
                    self._report_tick = tick
                    self._prep_ready_tick = tick + _delay_ticks(
                        cfg.preparation_delay_s, self.sample_period_s
                    )
                    self._command_due_tick = tick + _delay_ticks(
                        cfg.preparation_delay_s + cfg.command_delay_s, self.sample_period_s
                    )
                    self._completion_due_tick = tick + _delay_ticks(
                        cfg.preparation_delay_s + cfg.command_delay_s + cfg.sib_rach_delay_s,
                        self.sample_period_s,
                    )
                    self.phase = Phase.PREPARING
                    self.events.append(("report", tick))

        if self.phase is Phase.PREPARING and tick >= self._command_due_tick:
            if dl_snr_db[self.serving_cell] < cfg.snr_gate_db:
                out.append(self._record(Outcome.FAIL_DOWNLINK_COMMAND, command_tick=tick))
                self.events.append(("command_blocked", tick))
                self._reset_monitoring()
            else:
                self._command_tick = tick
                self.phase = Phase.RACH_IN_PROGRESS
                self.events.append(("command", tick))

        if self.phase is Phase.RACH_IN_PROGRESS and tick >= self._completion_due_tick:
            target = self.target_cell
            delay = (tick - self._report_tick) * self.sample_period_s
            if (
                ul_snr_db[target] >= cfg.snr_gate_db
                and dl_snr_db[target] >= cfg.snr_gate_db
            ):
                out.append(
                    self._record(
                        Outcome.SUCCESS,
                        command_tick=self._command_tick,
                        completion_tick=tick,
                        total_delay_s=delay,
                    )
                )
                self.serving_cell = target
                self.events.append(("connected", tick))
                self._reset_monitoring()
            else:
                until = tick + _delay_ticks(cfg.reestablishment_delay_s, self.sample_period_s)
                out.append(
                    self._record(
                        Outcome.FAIL_RACH,
                        command_tick=self._command_tick,
                        completion_tick=tick,
                        reestablish_until_tick=until,
                        total_delay_s=delay,
                    )
                )
                self.events.append(("rach_failed", tick))
                self._reestablish_until = until
                self.serving_cell = None
                self.phase = Phase.REESTABLISHING
                self._ttt_count = 0
                self._trigger_tick = None
                self._report_tick = None
        return out
