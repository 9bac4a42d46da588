/**
 * The feed's state: an append-only list of rows in seq order with
 * seq-based de-duplication, live cluster count updates, pulse lifecycle
 * driven by expire commands, and a bounded memory window (older rows are
 * trimmed and counted, never silently lost).
 */

import {
    ClusterPayload,
    EventPayload,
    ExpirePayload,
    EXPIRE_HIGHLIGHT,
    INSERT_CLUSTER,
    INSERT_EVENT,
    RenderCommand,
    UPDATE_CLUSTER,
    UpdatePayload,
    classNameOf,
} from './protocol.js';

export interface FeedRow {
    seq: number;
    kind: 'event' | 'cluster';
    label: string;
    detail: EventPayload | ClusterPayload;
    opacity: number;
    pulsing: boolean;
    classBadge: string;
    count?: number;
}

export type ApplyResult = 'appended' | 'updated' | 'expired' | 'duplicate' | 'ignored';

function eventLabel(p: EventPayload): string {
    return `[sev ${p.severity}] ${p.kind} — ${p.source} / ${p.actor}`;
}

function clusterLabel(p: ClusterPayload, count: number): string {
    const spanS = ((p.window_end - p.window_start) / 1000).toFixed(0);
    return `${count} × ${p.key.join(' / ')} (last ${spanS}s) — click to expand`;
}

export class FeedModel {
    rows: FeedRow[] = [];
    lastSeq = 0;
    duplicates = 0;
    overflowDropped = 0;

    private seen = new Set<number>();
    private rowBySeq = new Map<number, FeedRow>();
    private clusterRows = new Map<number, FeedRow>();

    constructor(private maxRows = 2000) {}

    apply(cmd: RenderCommand): ApplyResult {
        if (this.seen.has(cmd.seq)) {
            this.duplicates += 1;
            return 'duplicate';
        }
        this.seen.add(cmd.seq);
        if (cmd.seq > this.lastSeq) this.lastSeq = cmd.seq;

        switch (cmd.kind) {
            case INSERT_EVENT: {
                const payload = cmd.payload as EventPayload;
                this.append({
                    seq: cmd.seq,
                    kind: 'event',
                    label: eventLabel(payload),
                    detail: payload,
                    opacity: cmd.style.opacity,
                    pulsing: cmd.style.pulse,
                    classBadge: classNameOf(payload.class),
                });
                return 'appended';
            }
            case INSERT_CLUSTER: {
                const payload = cmd.payload as ClusterPayload;
                const row: FeedRow = {
                    seq: cmd.seq,
                    kind: 'cluster',
                    label: clusterLabel(payload, payload.count),
                    detail: payload,
                    opacity: cmd.style.opacity,
                    pulsing: false,
                    classBadge: classNameOf(payload.class),
                    count: payload.count,
                };
                this.clusterRows.set(payload.node_id, row);
                this.append(row);
                return 'appended';
            }
            case UPDATE_CLUSTER: {
                const payload = cmd.payload as UpdatePayload;
                const row = this.clusterRows.get(payload.node_id);
                if (!row) return 'ignored'; // its insert was trimmed away
                row.count = payload.count;
                row.classBadge = classNameOf(payload.class);
                row.label = clusterLabel(row.detail as ClusterPayload, payload.count);
                return 'updated';
            }
            case EXPIRE_HIGHLIGHT: {
                const payload = cmd.payload as ExpirePayload;
                const row = this.rowBySeq.get(payload.ref_seq);
                if (!row) return 'ignored';
                row.pulsing = false;
                return 'expired';
            }
            default:
                return 'ignored';
        }
    }

    private append(row: FeedRow): void {
        this.rows.push(row);
        this.rowBySeq.set(row.seq, row);
        while (this.rows.length > this.maxRows) {
            const dropped = this.rows.shift()!;
            this.rowBySeq.delete(dropped.seq);
            if (dropped.kind === 'cluster') {
                this.clusterRows.delete((dropped.detail as ClusterPayload).node_id);
            }
            this.overflowDropped += 1;
        }
    }
}

export interface WindowRange {
    start: number;
    end: number;
    padTop: number;
    padBottom: number;
}

/**
 * Which slice of `total` rows to materialise for a viewport.  Never more
 * than `maxWindow` rows regardless of viewport size.
 */
export function visibleWindow(
    scrollTop: number,
    rowHeight: number,
    viewportHeight: number,
    total: number,
    buffer = 20,
    maxWindow = 200,
): WindowRange {
    const first = Math.max(0, Math.floor(scrollTop / rowHeight) - buffer);
    const visible = Math.ceil(viewportHeight / rowHeight) + 2 * buffer;
    const count = Math.max(0, Math.min(visible, maxWindow, total));
    const start = Math.max(0, Math.min(first, total - count));
    const end = start + count;
    return {
        start,
        end,
        padTop: start * rowHeight,
        padBottom: Math.max(0, (total - end) * rowHeight),
    };
}
