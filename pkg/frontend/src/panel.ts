/** Detail panel toggle: click opens, clicking the same row again closes. */

import { FeedRow } from './feedModel.js';

export interface PanelState {
    open: boolean;
    row: FeedRow | null;
}

export function togglePanel(state: PanelState, row: FeedRow): PanelState {
    if (state.open && state.row?.seq === row.seq) {
        return { open: false, row: null };
    }
    return { open: true, row };
}

export function panelLines(row: FeedRow): string[] {
    if (row.kind === 'cluster') {
        const d = row.detail as import('./protocol.js').ClusterPayload;
        return [
            `cluster: ${d.key.join(' / ')}`,
            `count: ${row.count ?? d.count}`,
            `window: ${d.window_start.toFixed(0)} .. ${d.window_end.toFixed(0)} ms`,
            `representative: ${d.representative.event_id} sev ${d.representative.severity}`,
            `${d.representative.msg}`,
        ];
    }
    const d = row.detail as import('./protocol.js').EventPayload;
    return [
        `event: ${d.event_id}`,
        `ts: ${d.ts.toFixed(0)} ms  severity: ${d.severity}  reputation: ${d.reputation.toFixed(2)}`,
        `source: ${d.source}  actor: ${d.actor}  kind: ${d.kind}`,
        `${d.msg}`,
    ];
}
