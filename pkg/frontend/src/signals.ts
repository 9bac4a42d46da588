/**
 * Turns raw UI interactions into the gateway's signal records.
 *
 * Scroll velocity is sampled every 100 ms from scroll positions; signals
 * go out at most 10 per second (newest wins when throttled) and a 5 s
 * heartbeat keeps the server's idle detection honest.  All of it is
 * timestamp-driven so tests can run without timers.
 */

import { Selection, WireSignal } from './protocol.js';

const SAMPLE_MS = 100;
const MIN_SEND_GAP_MS = 100; // 10 signals/second
const HEARTBEAT_MS = 5000;

export class ScrollSampler {
    private lastTop = 0;
    private lastSampleAt = 0;
    private velocity = 0;
    private primed = false;

    /** Feed a scroll position; returns the current velocity estimate. */
    observe(scrollTop: number, nowMs: number): number {
        if (!this.primed) {
            this.primed = true;
            this.lastTop = scrollTop;
            this.lastSampleAt = nowMs;
            return this.velocity;
        }
        const dt = nowMs - this.lastSampleAt;
        if (dt >= SAMPLE_MS) {
            this.velocity = (Math.abs(scrollTop - this.lastTop) / dt) * 1000;
            this.lastTop = scrollTop;
            this.lastSampleAt = nowMs;
        }
        return this.velocity;
    }

    /** Velocity decays to zero once no scroll has been seen for a sample. */
    current(nowMs: number): number {
        if (nowMs - this.lastSampleAt > 2 * SAMPLE_MS) {
            this.velocity = 0;
        }
        return this.velocity;
    }
}

const EMPTY_SELECTION: Selection = { sources: [], actors: [], kinds: [] };

export class SignalEmitter {
    private sampler = new ScrollSampler();
    private selection: Selection = EMPTY_SELECTION;
    private selectionActive = false;
    private lastSentAt = -Infinity;
    private pendingDirty = false;
    sent = 0;

    onScroll(scrollTop: number, nowMs: number): void {
        const before = this.sampler.current(nowMs);
        const after = this.sampler.observe(scrollTop, nowMs);
        // Keep signalling while scrolling: the server zeroes a velocity it
        // has not heard about recently, so silence would end the pause.
        if (after !== before || after > 0) this.pendingDirty = true;
    }

    select(selection: Selection, nowMs: number): void {
        this.selection = selection;
        this.selectionActive = true;
        this.pendingDirty = true;
    }

    clearSelection(): void {
        if (this.selectionActive) this.pendingDirty = true;
        this.selectionActive = false;
        this.selection = EMPTY_SELECTION;
    }

    /**
     * Poll for an outgoing signal.  Returns null when rate-limited, or
     * nothing changed and the heartbeat is not yet due.
     */
    poll(nowMs: number): WireSignal | null {
        if (nowMs - this.lastSentAt < MIN_SEND_GAP_MS) return null;
        const heartbeatDue = nowMs - this.lastSentAt >= HEARTBEAT_MS;
        if (!this.pendingDirty && !heartbeatDue) return null;
        this.pendingDirty = false;
        this.lastSentAt = nowMs;
        this.sent += 1;
        return {
            scroll_velocity: this.sampler.current(nowMs),
            selection_active: this.selectionActive,
            selection: this.selection,
            client_ts: nowMs,
        };
    }
}
